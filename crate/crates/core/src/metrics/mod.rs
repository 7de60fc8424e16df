//! Clustering and classification metrics.
//!
//! Conventions that change results on degenerate inputs:
//!
//! - NMI is normalized by the arithmetic mean of the two entropies.
//! - ROC-AUC ranks ties by midrank; top-k ranks tied scores by lower class index.
//! - Precision/recall/F1 of a class with no predictions (or no support) is 0;
//!   MCC with a zero denominator is 0; kappa with chance agreement 1 is 1 if
//!   observed agreement is also 1, else 0.

mod classification;
mod clustering;

pub use classification::{classification_report, roc_auc_ovr, top_k_accuracy, ConfusionMatrix, MetricReport};
pub use clustering::{ari, contingency, nmi, silhouette, silhouette_with, Contingency, PairwiseDistances};

/// Normalizer used by [`nmi`], recorded in run manifests.
pub const NMI_NORMALIZATION: &str = "arithmetic";
pub const AUC_TIE_POLICY: &str = "midrank";
pub const TOP_K_TIE_POLICY: &str = "lowest-class-index";
