use thiserror::Error;

/// Errors raised by the estimators, generators and analysis routines.
#[derive(Debug, Error)]
pub enum GgmError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("non-positive diagonal entry at index {index}: {value}")]
    NonPositiveDiagonal { index: usize, value: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is singular and cannot be inverted")]
    Singular,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("degenerate regression for variable {0}: zero residual variance")]
    DegenerateFit(usize),

    #[error("shock propagation diverges: spectral radius {0} >= 1")]
    Divergent(f64),

    #[error("no finite score on the selection grid")]
    NoFiniteScore,

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GgmError>;
