use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing input file: {}", .0.display())]
    MissingInput(PathBuf),

    #[error("empty corpus: no valid documents in {}", .0.display())]
    EmptyCorpus(PathBuf),

    #[error("invalid category {0:?}")]
    InvalidCategory(String),

    #[error("insufficient documents: split requires {required}, corpus has {available}")]
    InsufficientDocuments { required: usize, available: usize },

    #[error("CoNLL-U parse error at line {line}: {message}")]
    Conllu { line: usize, message: String },

    #[error("cannot normalize embedding for document {doc_id:?}: {reason}")]
    Normalization { doc_id: String, reason: &'static str },

    #[error("embedding provider failed on batch {batch}: {message}")]
    Provider {
        batch: usize,
        message: String,
        retriable: bool,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix format error: {0}")]
    Format(String),

    #[error("matrix file corrupt: expected {expected} bytes, found {actual}")]
    Corrupt { expected: u64, actual: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("every configuration failed: {0}")]
    AllFailed(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Usage,
            Error::Contract(_) => ErrorKind::Internal,
            _ => ErrorKind::Data,
        }
    }

    pub fn is_retriable(&self) -> bool {
        matches!(self, Error::Provider { retriable: true, .. })
    }
}
