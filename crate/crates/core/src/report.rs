//! Result tables (CSV and Markdown) and the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cluster::CompositionReport;
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::pipeline;
use crate::repr::ReprMode;

pub const CLUSTERING_COLUMNS: [&str; 6] = [
    "Representation",
    "Best Model (Algorithm)",
    "Clusters (K)",
    "ARI",
    "NMI",
    "Silh.",
];

pub const CLUSTERING_DECIMALS: usize = 4;
pub const CLASSIFICATION_DECIMALS: usize = 3;

pub fn classification_columns() -> Vec<&'static str> {
    let mut cols = vec!["Using_mode", "model"];
    cols.extend(MetricReport::COLUMNS);
    cols
}

/// Fixed-point rendering, rounding half to even on the exact binary value.
/// NaN renders as `n/a`; negative zero loses its sign.
pub fn fixed(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        return "n/a".into();
    }
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Best clustering for one representation mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringOutcome {
    pub mode: ReprMode,
    pub provider: String,
    /// Display name, e.g. `KMeans` or `KMeans/GMM` when both agree.
    pub algorithm: String,
    pub k: usize,
    pub ari: f64,
    pub nmi: f64,
    pub silhouette: f64,
}

/// One row per representation mode in canonical order; among several
/// outcomes for a mode the highest ARI wins (first on ties). Modes without
/// an outcome render as `n/a`.
pub fn clustering_rows(outcomes: &[ClusteringOutcome]) -> Vec<Vec<String>> {
    ReprMode::ALL
        .iter()
        .map(|&mode| {
            let best = outcomes
                .iter()
                .filter(|o| o.mode == mode)
                .fold(None::<&ClusteringOutcome>, |b, o| match b {
                    Some(b) if b.ari >= o.ari => Some(b),
                    _ => Some(o),
                });
            match best {
                Some(o) => vec![
                    mode.title().to_string(),
                    format!("{} ({})", o.provider, o.algorithm),
                    o.k.to_string(),
                    fixed(o.ari, CLUSTERING_DECIMALS),
                    fixed(o.nmi, CLUSTERING_DECIMALS),
                    fixed(o.silhouette, CLUSTERING_DECIMALS),
                ],
                None => {
                    let mut row = vec![mode.title().to_string()];
                    row.extend(std::iter::repeat_n("n/a".to_string(), CLUSTERING_COLUMNS.len() - 1));
                    row
                }
            }
        })
        .collect()
}

/// Evaluation of one classifier, tagged with the clustering representation
/// whose propagated ids accompany it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationOutcome {
    pub cluster_mode: ReprMode,
    pub classify_mode: ReprMode,
    pub model: String,
    pub report: MetricReport,
}

/// One row per (cluster mode, classify mode) pair present, in canonical
/// order. With several models for a pair the highest macro-F1 wins
/// (first on ties).
pub fn classification_rows(outcomes: &[ClassificationOutcome]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for &cm in &ReprMode::ALL {
        for &clm in &ReprMode::ALL {
            let best = outcomes
                .iter()
                .filter(|o| o.cluster_mode == cm && o.classify_mode == clm)
                .fold(None::<&ClassificationOutcome>, |b, o| match b {
                    Some(b) if b.report.f1_macro >= o.report.f1_macro => Some(b),
                    _ => Some(o),
                });
            if let Some(o) = best {
                let mut row = vec![format!("{}/{}", cm.short(), clm.short()), o.model.clone()];
                row.extend(o.report.values().iter().map(|&v| fixed(v, CLASSIFICATION_DECIMALS)));
                rows.push(row);
            }
        }
    }
    rows
}

pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row)?;
    }
    out.flush().map_err(|e| Error::io("csv table", e))?;
    Ok(())
}

pub fn write_markdown<W: Write>(mut w: W, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    writeln!(w, "| {} |", header.join(" | "))?;
    writeln!(w, "|{}", "---|".repeat(header.len()))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        writeln!(w, "| {} |", cells.join(" | "))?;
    }
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.md` under `dir`.
pub fn emit_table(dir: &Path, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = pipeline::create(&csv_path)?;
    write_csv(&mut w, header, rows)?;
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let md_path = dir.join(format!("{stem}.md"));
    let mut w = pipeline::create(&md_path)?;
    write_markdown(&mut w, header, rows).map_err(|e| Error::io(&md_path, e))?;
    w.flush().map_err(|e| Error::io(&md_path, e))
}

pub const COMPOSITION_COLUMNS: [&str; 8] = [
    "representation",
    "provider",
    "algorithm",
    "cluster",
    "size",
    "dominant_label",
    "purity",
    "label_counts",
];

/// Composition of one selected clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionEntry {
    pub mode: ReprMode,
    pub provider: String,
    pub algorithm: String,
    pub report: CompositionReport,
}

/// One row per cluster; `label_counts` is `label:count` pairs joined by `;`.
pub fn write_composition_csv<W: Write>(w: W, entries: &[CompositionEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(COMPOSITION_COLUMNS)?;
    for e in entries {
        for c in &e.report.clusters {
            let counts: Vec<String> = c.counts.iter().map(|(l, n)| format!("{l}:{n}")).collect();
            out.write_record([
                e.mode.as_str().to_string(),
                e.provider.clone(),
                e.algorithm.clone(),
                c.cluster.to_string(),
                c.total.to_string(),
                c.dominant.clone(),
                fixed(c.purity, CLUSTERING_DECIMALS),
                counts.join(";"),
            ])?;
        }
    }
    out.flush().map_err(|e| Error::io("composition table", e))?;
    Ok(())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    Ok(sha256_hex(&bytes))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderRecord {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

/// Everything needed to trace a run. Wall-clock timings are deliberately
/// absent so identical runs produce identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    pub config: serde_json::Value,
    pub providers: Vec<ProviderRecord>,
    /// Input file name → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name → SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub conventions: BTreeMap<String, String>,
    /// Taken from `SOURCE_DATE_EPOCH` when set.
    pub timestamp: Option<u64>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = pipeline::create(path)?;
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Conventions that change numbers on degenerate inputs.
pub fn conventions() -> BTreeMap<String, String> {
    [
        ("distance", "euclidean on l2-normalized rows"),
        ("nmi_normalization", crate::metrics::NMI_NORMALIZATION),
        ("auc_ties", crate::metrics::AUC_TIE_POLICY),
        ("top_k_ties", crate::metrics::TOP_K_TIE_POLICY),
        ("gmm_covariance", "diagonal"),
        ("hdbscan_noise", "one extra group for ARI/NMI/silhouette"),
        ("kmeans_empty_cluster", "farthest point of the largest cluster"),
        ("restarts", "10"),
        ("classifier", "softmax head over frozen embeddings, AdamW"),
        ("weight_decay_scope", "weights only, bias excluded"),
        ("propagation", "1-nearest neighbor by cosine, ties to lower source index"),
        ("rounding", "half-even; 4 decimals clustering, 3 classification"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
