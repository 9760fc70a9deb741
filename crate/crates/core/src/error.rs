use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Both class means coincide. The fallback threshold sits on the common mean.
    #[error("tied class means at {threshold}; no discriminating direction")]
    TiedMeans { threshold: f64 },

    #[error("degenerate loss: {0}")]
    DegenerateLoss(String),

    #[error("precision limit exceeded: {0}")]
    Precision(String),

    #[error("rank deficient: requested {requested} components but rank is {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("{path}: row {row}, column {column}: {message}")]
    Format {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: row {row}: unknown label {value:?}")]
    Label {
        path: PathBuf,
        row: usize,
        value: String,
    },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("classifier undefined: a = b = c = 0")]
    UndefinedClassifier,

    #[error("non-finite Hessian entry at ({row}, {col})")]
    NumericalFailure { row: usize, col: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")))
    }
}
