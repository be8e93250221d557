use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension {n} out of range 1..={max}")]
    DimensionOutOfRange { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("coefficient p_{{{subset}}} is zero")]
    ZeroCoefficient { subset: String },

    #[error("polynomial is not infinitely divisible: {0}")]
    NotInfinitelyDivisible(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("nonpositive base {value} in Laplace transform")]
    NonPositiveBase { value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within budget ({terms} terms, last shell ratio {ratio:.3e})")]
    SeriesBudget { terms: usize, ratio: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
