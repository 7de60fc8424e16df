//! KMeans, diagonal GMM and HDBSCAN over row-major embeddings, plus the
//! selection sweeps and cluster-composition analysis.
//!
//! All algorithms use Euclidean distance. Rows are expected to be
//! ℓ2-normalized, but nothing here depends on it.

mod composition;
mod gmm;
mod hdbscan;
mod kmeans;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use composition::{cluster_composition, ClusterComposition, CompositionReport};
pub use gmm::{gmm_fit, GmmFit, GmmOptions};
pub use hdbscan::{hdbscan_fit, hdbscan_with, DensityResult};
pub use kmeans::{kmeans_fit, KMeansOptions};
pub use sweep::{
    composite_score, density_sweep, partition_sweep, selection_score, write_sweep_csv, SweepEntry, SweepOutcome,
    DEFAULT_MIN_CLUSTER_SIZES, SWEEP_COLUMNS,
};

/// Label given to HDBSCAN noise points.
pub const NOISE: i64 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    KMeans,
    Gmm,
    Hdbscan,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::KMeans, Algorithm::Gmm, Algorithm::Hdbscan];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::KMeans => "kmeans",
            Algorithm::Gmm => "gmm",
            Algorithm::Hdbscan => "hdbscan",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Algorithm::KMeans => "KMeans",
            Algorithm::Gmm => "GMM",
            Algorithm::Hdbscan => "HDBSCAN",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" => Ok(Algorithm::KMeans),
            "gmm" => Ok(Algorithm::Gmm),
            "hdbscan" => Ok(Algorithm::Hdbscan),
            _ => Err(Error::Config(format!("unknown clustering algorithm {s:?}"))),
        }
    }
}

/// Hard partition from KMeans or GMM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub algorithm: Algorithm,
    pub k: usize,
    pub labels: Vec<usize>,
    /// Inertia for KMeans; mean per-sample log-likelihood for GMM.
    pub objective: f64,
    pub seed: u64,
    /// Objective after every iteration of the winning restart.
    pub trace: Vec<f64>,
}

impl PartitionResult {
    pub fn signed_labels(&self) -> Vec<i64> {
        self.labels.iter().map(|&l| l as i64).collect()
    }
}
