use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("momentum {momentum} exceeds the Nyquist bound {limit}")]
    Aliasing { momentum: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("inconclusive classification: {0}")]
    Inconclusive(String),

    #[error("invalid picture for this transformation: {0}")]
    State(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid deviation function: {0}")]
    InvalidDeviation(String),

    #[error("ground state residual {residual:e} exceeds {tolerance:e}")]
    InvalidGround { residual: f64, tolerance: f64 },
}
