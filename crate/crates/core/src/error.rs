use std::path::PathBuf;

use thiserror::Error;

use crate::propagation::Stage;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("non-finite value at line {line}")]
    NonFinite { line: u64 },

    #[error("unknown class {class:?} at line {line}")]
    UnknownClass { line: u64, class: String },

    #[error("column {0:?} not found in header")]
    MissingColumn(String),

    #[error("dataset is empty")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("series of length {len} is too short for lag {lag}")]
    SeriesTooShort { len: usize, lag: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at least two points are required")]
    TooFewPoints,

    #[error("nothing to propagate: no labeled points")]
    NothingToPropagate,

    #[error("propagation stage out of order: expected {expected:?}, found {found:?}")]
    Stage { expected: Stage, found: Stage },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from bad user input rather than a failure
    /// inside the library or the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Stage { .. })
    }
}
