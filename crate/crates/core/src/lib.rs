//! Triple-augmented text representations for organizing scientific abstracts.
//!
//! The crate is a set of pipeline stages that each read and write plain files:
//!
//! - [`corpus`]: JSON-lines ingestion, text cleaning, label mapping, seeded splits.
//! - [`conllu`] and [`triples`]: dependency-parse ingestion and subject/verb/object extraction.
//! - [`repr`]: the four representation modes (abstract, triples, concatenation, hybrid).
//! - [`embed`]: embedding providers, l2 normalization and the `EMB1` matrix format.
//! - [`cluster`]: k-means, diagonal GMM and HDBSCAN plus model-selection sweeps.
//! - [`metrics`]: external/internal clustering metrics and the classification suite.
//! - [`propagate`]: nearest-neighbor transfer of cluster ids.
//! - [`classify`]: softmax head over frozen embeddings trained with AdamW.
//! - [`report`]: result tables and the run manifest.
//! - [`pipeline`]: file-level orchestration used by the `triplex` binary.

pub mod classify;
pub mod cluster;
pub mod config;
pub mod conllu;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod propagate;
pub mod report;
pub mod repr;
pub mod rng;
pub mod synth;
pub mod triples;

pub use error::{Error, ErrorKind, Result};
