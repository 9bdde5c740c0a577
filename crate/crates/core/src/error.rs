use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("no pair: a codebook of size {0} has no pairwise distance")]
    NoPair(usize),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("bound ordering violated: lower {lower} exceeds upper {upper}")]
    Sandwich { lower: f64, upper: f64 },
    #[error("Toeplitz construction failed: {0}")]
    Toeplitz(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
