use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("variable x{index} out of range for dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("index r = {r} out of range for n = {n}")]
    IndexOutOfRange { r: usize, n: usize },

    #[error("eigen-solver failure: {0}")]
    EigenFailure(String),

    #[error("radius schedule needs at least {min} increasing entries")]
    ScheduleTooShort { min: usize },

    #[error("dimension {0} is above the supported range")]
    DimensionUnsupported(usize),

    #[error("point lies within {distance:e} of the singular set")]
    SingularSet { distance: f64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
