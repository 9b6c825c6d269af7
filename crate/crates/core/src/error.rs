use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not nilpotent: max|M^N| = {residual:e}")]
    NotNilpotent { residual: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("product {0} is outside the Gaussian-Erf algebra")]
    OutsideAlgebra(String),

    #[error("non-polynomial terms survived cancellation: max residual coefficient {residual:e}")]
    CancellationFailed { residual: f64 },

    #[error("operation requires N = 2, got N = {0}")]
    RequiresSizeTwo(usize),

    #[error("moment system ill-conditioned at degree {n}: estimate {condition:e}")]
    IllConditioned { n: usize, condition: f64 },

    #[error("sequence too short: {0}")]
    SequenceTooShort(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
