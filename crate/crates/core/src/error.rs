use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the operator algebra, the source models and the
/// experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("operator is not Hermitian (symmetry residual {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is {0}, expected 1")]
    Trace(f64),

    #[error("operator is not a projector (idempotency residual {0:e})")]
    NotProjector(f64),

    #[error("dimension {dim} exceeds the configured guard {guard}")]
    DimensionGuard { dim: u128, guard: usize },

    #[error("invalid probability vector: {0}")]
    Probability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("eigendecomposition did not converge")]
    Eigen,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
