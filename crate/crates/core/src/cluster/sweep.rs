use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{gmm_fit, hdbscan_with, kmeans_fit, Algorithm, GmmOptions, KMeansOptions, NOISE};
use crate::embed::RowsView;
use crate::error::{Error, Result};
use crate::metrics::{ari, nmi, silhouette_with, PairwiseDistances};
use crate::rng::derive_seed;

pub const DEFAULT_MIN_CLUSTER_SIZES: [usize; 6] = [5, 10, 15, 25, 50, 100];

pub const SWEEP_COLUMNS: [&str; 8] = [
    "algorithm",
    "param",
    "ARI",
    "NMI",
    "silhouette",
    "noise_fraction",
    "selection_score",
    "seed",
];

/// Selection score for KMeans and GMM fits.
pub fn selection_score(ari: f64, nmi: f64) -> f64 {
    0.5 * ari + 0.5 * nmi
}

/// Selection score for HDBSCAN fits.
pub fn composite_score(nmi: f64, ari: f64, noise_fraction: f64) -> f64 {
    nmi + 0.5 * ari - 0.5 * noise_fraction
}

/// One fitted configuration. `param` is k, or min_cluster_size for HDBSCAN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub algorithm: Algorithm,
    pub param: usize,
    pub seed: u64,
    pub ari: f64,
    pub nmi: f64,
    /// NaN when fewer than two groups exist.
    pub silhouette: f64,
    pub noise_fraction: f64,
    pub score: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub labels: Vec<i64>,
}

impl SweepEntry {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Number of non-noise groups in `labels`.
    pub fn n_clusters(&self) -> usize {
        let mut seen: Vec<i64> = self.labels.iter().copied().filter(|&l| l != NOISE).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    fn failure(algorithm: Algorithm, param: usize, seed: u64, error: &Error) -> Self {
        SweepEntry {
            algorithm,
            param,
            seed,
            ari: f64::NAN,
            nmi: f64::NAN,
            silhouette: f64::NAN,
            noise_fraction: f64::NAN,
            score: f64::NAN,
            error: Some(error.to_string()),
            labels: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub algorithm: Algorithm,
    pub entries: Vec<SweepEntry>,
    /// Index into `entries` of the selected configuration.
    pub best: usize,
}

impl SweepOutcome {
    pub fn best_entry(&self) -> &SweepEntry {
        &self.entries[self.best]
    }

    pub fn best_score(&self) -> f64 {
        self.best_entry().score
    }

    fn select(algorithm: Algorithm, entries: Vec<SweepEntry>) -> Result<Self> {
        let mut best: Option<usize> = None;
        for (i, e) in entries.iter().enumerate() {
            if e.failed() || e.score.is_nan() {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let cur = &entries[b];
                    e.score > cur.score || (e.score == cur.score && e.param < cur.param)
                }
            };
            if better {
                best = Some(i);
            }
        }
        let best = best.ok_or_else(|| {
            let reasons: Vec<String> = entries
                .iter()
                .map(|e| format!("{}={}: {}", e.algorithm, e.param, e.error.as_deref().unwrap_or("no score")))
                .collect();
            Error::AllFailed(reasons.join("; "))
        })?;
        Ok(SweepOutcome {
            algorithm,
            entries,
            best,
        })
    }
}

fn undefined_as_nan(r: Result<f64>) -> Result<f64> {
    match r {
        Err(Error::UndefinedMetric(_)) => Ok(f64::NAN),
        other => other,
    }
}

fn check_truth(n: usize, truth: &[usize]) -> Result<()> {
    if truth.len() != n {
        return Err(Error::InvalidArgument(format!("{n} rows but {} true labels", truth.len())));
    }
    Ok(())
}

/// Fits KMeans or GMM at every k and selects by `selection_score`,
/// preferring the smaller k on ties. Config `i` is seeded `seed ^ i`.
pub fn partition_sweep(
    x: RowsView<'_>,
    dist: &PairwiseDistances,
    truth: &[usize],
    algorithm: Algorithm,
    ks: &[usize],
    seed: u64,
) -> Result<SweepOutcome> {
    check_truth(x.len(), truth)?;
    if ks.is_empty() {
        return Err(Error::InvalidArgument("empty k range".into()));
    }
    let entries = ks
        .par_iter()
        .enumerate()
        .map(|(i, &k)| {
            let s = derive_seed(seed, i as u64);
            let fit = match algorithm {
                Algorithm::KMeans => kmeans_fit(x, k, s, KMeansOptions::default()),
                Algorithm::Gmm => gmm_fit(x, k, s, GmmOptions::default()).map(|f| f.partition),
                Algorithm::Hdbscan => Err(Error::InvalidArgument("HDBSCAN has no k; use density_sweep".into())),
            };
            let scored = fit.and_then(|p| {
                let labels = p.signed_labels();
                let a = ari(truth, &labels)?;
                let m = nmi(truth, &labels)?;
                let sil = undefined_as_nan(silhouette_with(dist, &labels))?;
                Ok(SweepEntry {
                    algorithm,
                    param: k,
                    seed: s,
                    ari: a,
                    nmi: m,
                    silhouette: sil,
                    noise_fraction: 0.0,
                    score: selection_score(a, m),
                    error: None,
                    labels,
                })
            });
            scored.unwrap_or_else(|e| SweepEntry::failure(algorithm, k, s, &e))
        })
        .collect();
    SweepOutcome::select(algorithm, entries)
}

/// Fits HDBSCAN at every min_cluster_size and selects by `composite_score`,
/// preferring the smaller size on ties. Noise counts as one extra group for
/// ARI, NMI and silhouette; an all-noise labeling scores ARI = NMI = 0.
pub fn density_sweep(dist: &PairwiseDistances, truth: &[usize], sizes: &[usize], seed: u64) -> Result<SweepOutcome> {
    check_truth(dist.len(), truth)?;
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no min_cluster_size values".into()));
    }
    let entries = sizes
        .par_iter()
        .enumerate()
        .map(|(i, &size)| {
            let s = derive_seed(seed, i as u64);
            let scored = hdbscan_with(dist, size, None).and_then(|r| {
                let all_noise = r.labels.iter().all(|&l| l == NOISE);
                let (a, m) = if all_noise {
                    (0.0, 0.0)
                } else {
                    (ari(truth, &r.labels)?, nmi(truth, &r.labels)?)
                };
                let sil = undefined_as_nan(silhouette_with(dist, &r.labels))?;
                Ok(SweepEntry {
                    algorithm: Algorithm::Hdbscan,
                    param: size,
                    seed: s,
                    ari: a,
                    nmi: m,
                    silhouette: sil,
                    noise_fraction: r.noise_fraction,
                    score: composite_score(m, a, r.noise_fraction),
                    error: None,
                    labels: r.labels,
                })
            });
            scored.unwrap_or_else(|e| SweepEntry::failure(Algorithm::Hdbscan, size, s, &e))
        })
        .collect();
    SweepOutcome::select(Algorithm::Hdbscan, entries)
}

fn field(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes sweep rows in `SWEEP_COLUMNS` order; failed rows leave metrics empty.
pub fn write_sweep_csv<W: Write>(w: W, entries: &[SweepEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_COLUMNS)?;
    for e in entries {
        out.write_record([
            e.algorithm.as_str().to_string(),
            e.param.to_string(),
            field(e.ari),
            field(e.nmi),
            field(e.silhouette),
            field(e.noise_fraction),
            if e.failed() { "failed".to_string() } else { field(e.score) },
            e.seed.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("sweep table", e))?;
    Ok(())
}
