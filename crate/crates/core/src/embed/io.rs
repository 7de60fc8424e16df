//! `EMB1` matrix files.
//!
//! Layout (little-endian):
//!
//! ```text
//! "EMB1" | dim: u32 | rows: u64 | json_len: u32 | json {provider_name, mode, doc_ids} | rows*dim f32
//! ```
//!
//! Rows are stored as 32-bit floats and promoted to 64-bit on load, so a
//! round trip is bit-exact for matrices whose entries are representable in
//! `f32` and rounds other values to the nearest `f32`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::repr::ReprMode;

pub const MAGIC: &[u8; 4] = b"EMB1";
const FIXED_HEADER: u64 = 4 + 4 + 8 + 4;
// Loaded rows are f32-rounded unit vectors.
const LOAD_NORM_TOLERANCE: f64 = 1e-5;

#[derive(Serialize, Deserialize)]
struct Meta {
    provider_name: String,
    mode: ReprMode,
    doc_ids: Vec<String>,
}

pub fn write_matrix<W: Write>(m: &EmbeddingMatrix, mut w: W) -> std::io::Result<()> {
    let meta = serde_json::to_vec(&Meta {
        provider_name: m.provider_name().to_string(),
        mode: m.mode(),
        doc_ids: m.doc_ids().to_vec(),
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&(m.dim() as u32).to_le_bytes())?;
    w.write_all(&(m.len() as u64).to_le_bytes())?;
    w.write_all(&(meta.len() as u32).to_le_bytes())?;
    w.write_all(&meta)?;
    let mut buf = Vec::with_capacity(m.as_slice().len() * 4);
    for x in m.as_slice() {
        buf.extend_from_slice(&(*x as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()
}

pub fn save_matrix(m: &EmbeddingMatrix, path: &Path) -> Result<()> {
    write_matrix(m, crate::pipeline::create(path)?).map_err(|e| Error::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<EmbeddingMatrix> {
    let bytes = std::fs::read(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Error::MissingInput(path.to_path_buf())
        } else {
            Error::io(path, e)
        }
    })?;
    read_matrix(&bytes)
}

pub fn read_matrix(bytes: &[u8]) -> Result<EmbeddingMatrix> {
    let actual = bytes.len() as u64;
    if actual < FIXED_HEADER {
        return Err(Error::Corrupt {
            expected: FIXED_HEADER,
            actual,
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&bytes[0..4]),
            std::str::from_utf8(MAGIC).unwrap_or_default()
        )));
    }
    let dim = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as u64;
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let json_len = u32::from_le_bytes(bytes[16..20].try_into().expect("4 bytes")) as u64;
    if dim == 0 {
        return Err(Error::Format("dimension 0".into()));
    }
    let expected = rows
        .checked_mul(dim)
        .and_then(|c| c.checked_mul(4))
        .and_then(|c| c.checked_add(FIXED_HEADER + json_len))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if actual != expected {
        return Err(Error::Corrupt { expected, actual });
    }
    let json_end = (FIXED_HEADER + json_len) as usize;
    let meta: Meta = serde_json::from_slice(&bytes[FIXED_HEADER as usize..json_end])
        .map_err(|e| Error::Format(format!("metadata block: {e}")))?;
    if meta.doc_ids.len() as u64 != rows {
        return Err(Error::Format(format!(
            "metadata lists {} ids for {rows} rows",
            meta.doc_ids.len()
        )));
    }
    let dim = dim as usize;
    let vectors: Vec<f64> = bytes[json_end..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    for (i, row) in vectors.chunks_exact(dim).enumerate() {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > LOAD_NORM_TOLERANCE {
            return Err(Error::Format(format!(
                "row {i} ({:?}) has norm {norm}, expected 1",
                meta.doc_ids[i]
            )));
        }
    }
    EmbeddingMatrix::from_parts(meta.doc_ids, dim, vectors, meta.provider_name, meta.mode)
        .map_err(|e| Error::Format(e.to_string()))
}
