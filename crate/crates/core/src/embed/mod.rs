//! Embedding matrices and the providers that produce them.
//!
//! Everything downstream of this module consumes [`EmbeddingMatrix`] only;
//! providers are an implementation detail of the `embed` stage.

mod hash;
mod io;
mod remote;

use std::collections::HashSet;

pub use hash::HashProvider;
pub use io::{load_matrix, read_matrix, save_matrix, write_matrix, MAGIC};
pub use remote::{ModelInfo, RemoteProvider, RetryPolicy};

use crate::error::{Error, Result};
use crate::repr::{ReprDoc, ReprMode};

pub const DEFAULT_BATCH_SIZE: usize = 64;

/// Row-major matrix of l2-normalized embeddings keyed by document id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    doc_ids: Vec<String>,
    dim: usize,
    vectors: Vec<f64>,
    provider_name: String,
    mode: ReprMode,
}

impl EmbeddingMatrix {
    /// Builds a matrix from raw rows, normalizing each one.
    pub fn from_raw(
        doc_ids: Vec<String>,
        dim: usize,
        rows: Vec<Vec<f64>>,
        provider_name: impl Into<String>,
        mode: ReprMode,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Contract("embedding dimension must be positive".into()));
        }
        if doc_ids.len() != rows.len() {
            return Err(Error::Contract(format!(
                "{} document ids for {} rows",
                doc_ids.len(),
                rows.len()
            )));
        }
        let mut vectors = Vec::with_capacity(rows.len() * dim);
        for (id, row) in doc_ids.iter().zip(&rows) {
            if row.len() != dim {
                return Err(Error::Contract(format!(
                    "row for {id:?} has length {}, expected {dim}",
                    row.len()
                )));
            }
            vectors.extend(normalize_l2(row).map_err(|reason| Error::Normalization {
                doc_id: id.clone(),
                reason,
            })?);
        }
        Self::from_parts(doc_ids, dim, vectors, provider_name.into(), mode)
    }

    /// Wraps rows that are already normalized (e.g. read back from disk).
    pub(crate) fn from_parts(
        doc_ids: Vec<String>,
        dim: usize,
        vectors: Vec<f64>,
        provider_name: String,
        mode: ReprMode,
    ) -> Result<Self> {
        if vectors.len() != doc_ids.len() * dim {
            return Err(Error::Contract("vector buffer does not match shape".into()));
        }
        let mut seen = HashSet::with_capacity(doc_ids.len());
        for id in &doc_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Contract(format!("duplicate document id {id:?} in matrix")));
            }
        }
        Ok(EmbeddingMatrix {
            doc_ids,
            dim,
            vectors,
            provider_name,
            mode,
        })
    }

    pub fn empty(dim: usize, provider_name: impl Into<String>, mode: ReprMode) -> Self {
        EmbeddingMatrix {
            doc_ids: Vec::new(),
            dim,
            vectors: Vec::new(),
            provider_name: provider_name.into(),
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn provider_name(&self) -> &str {
        &self.provider_name
    }

    pub fn mode(&self) -> ReprMode {
        self.mode
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vectors
    }

    /// Sub-matrix with the rows of `ids`, in that order.
    pub fn select(&self, ids: &[String]) -> Result<EmbeddingMatrix> {
        let index: std::collections::HashMap<&str, usize> =
            self.doc_ids.iter().enumerate().map(|(i, d)| (d.as_str(), i)).collect();
        let mut vectors = Vec::with_capacity(ids.len() * self.dim);
        for id in ids {
            let &i = index
                .get(id.as_str())
                .ok_or_else(|| Error::Contract(format!("document {id:?} missing from embedding matrix")))?;
            vectors.extend_from_slice(self.row(i));
        }
        Self::from_parts(ids.to_vec(), self.dim, vectors, self.provider_name.clone(), self.mode)
    }
}

impl EmbeddingMatrix {
    pub fn view(&self) -> RowsView<'_> {
        RowsView::new(&self.vectors, self.dim)
    }
}

/// Borrowed row-major `n × dim` block of points.
#[derive(Debug, Clone, Copy)]
pub struct RowsView<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> RowsView<'a> {
    pub fn new(data: &'a [f64], dim: usize) -> Self {
        assert!(dim > 0 && data.len().is_multiple_of(dim), "buffer is not a whole number of rows");
        RowsView { data, dim }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'a, f64> {
        self.data.chunks_exact(self.dim)
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Scales `v` to unit Euclidean norm.
pub fn normalize_l2(v: &[f64]) -> std::result::Result<Vec<f64>, &'static str> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err("non-finite component");
    }
    // Scale first so huge or tiny components do not overflow the sum of squares.
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return Err("zero vector");
    }
    let norm = max * v.iter().map(|x| (x / max).powi(2)).sum::<f64>().sqrt();
    Ok(v.iter().map(|x| x / norm).collect())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (dot(a, a).sqrt() * dot(b, b).sqrt())
}

/// Produces raw (unnormalized) vectors for texts.
pub trait EmbeddingProvider {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
}

/// Embeds every representation in batches and normalizes the rows.
pub fn embed_corpus(reprs: &[ReprDoc], provider: &dyn EmbeddingProvider, batch_size: usize) -> Result<EmbeddingMatrix> {
    let dim = provider.dim();
    let Some(first) = reprs.first() else {
        return Ok(EmbeddingMatrix::empty(dim, provider.name(), ReprMode::Abstract));
    };
    let mode = first.mode;
    if let Some(other) = reprs.iter().find(|r| r.mode != mode) {
        return Err(Error::Contract(format!(
            "mixed representation modes in one matrix ({mode} and {})",
            other.mode
        )));
    }
    let batch_size = batch_size.max(1);
    let mut rows = Vec::with_capacity(reprs.len());
    for (batch, chunk) in reprs.chunks(batch_size).enumerate() {
        let texts: Vec<String> = chunk.iter().map(|r| r.text.clone()).collect();
        let vectors = provider.embed(&texts).map_err(|e| match e {
            Error::Provider { message, retriable, .. } => Error::Provider {
                batch,
                message,
                retriable,
            },
            other => other,
        })?;
        if vectors.len() != texts.len() {
            return Err(Error::Contract(format!(
                "provider {} returned {} vectors for {} texts in batch {batch}",
                provider.name(),
                vectors.len(),
                texts.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::Contract(format!(
                "provider {} returned a {}-dim vector, advertised {dim}",
                provider.name(),
                v.len()
            )));
        }
        rows.extend(vectors);
    }
    let ids = reprs.iter().map(|r| r.doc_id.clone()).collect();
    EmbeddingMatrix::from_raw(ids, dim, rows, provider.name(), mode)
}
