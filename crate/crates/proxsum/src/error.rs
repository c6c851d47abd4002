use thiserror::Error;

/// Errors raised at the oracle boundary and by solver preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("component index {index} out of range for m = {m}")]
    ComponentOutOfRange { index: usize, m: usize },

    #[error("prox parameter beta must be positive, got {0}")]
    NonPositiveBeta(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("function class is missing required data: {0}")]
    MissingClassData(&'static str),

    #[error("invalid function class: {0}")]
    InvalidClass(String),

    #[error("problem is not strongly convex (lambda = 0); apply the regularization reduction first")]
    NotStronglyConvex,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension budget exhausted: orthogonalization residual {residual:.3e} below threshold")]
    DimensionExhausted { residual: f64 },

    #[error("adversary already finalized")]
    Finalized,

    #[error("no closed-form optimum for this variant and no reference solve attached")]
    NoOptimum,
}

pub type Result<T> = std::result::Result<T, Error>;
