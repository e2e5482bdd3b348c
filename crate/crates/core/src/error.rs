use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("alpha = {alpha} is outside (0, n) ∩ (0, 2] for n = {dim}")]
    InvalidAlpha { alpha: f64, dim: usize },

    #[error("invalid domain partition: {0}")]
    InvalidPartition(String),

    #[error("field charge is invalid: {0}")]
    FieldSeparation(String),

    #[error("{size}x{size} kernel matrix is not positive definite; refine the sampling or lower sigma")]
    NotPositiveDefinite { size: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("active-set solver did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
