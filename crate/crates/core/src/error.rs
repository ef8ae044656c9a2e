use thiserror::Error;

pub type Result<T> = std::result::Result<T, BergmanError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BergmanError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} not supported (1 <= n <= 3)")]
    UnsupportedDimension(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("point is not interior to the domain")]
    NotInterior,

    #[error("point is not on the boundary of the domain")]
    NotOnBoundary,

    #[error("zero direction vector")]
    ZeroDirection,

    #[error("non-finite coordinate")]
    NonFinite,

    #[error("domain is unbounded")]
    Unbounded,

    #[error("operation not supported for this domain: {0}")]
    Unsupported(String),

    #[error("flat-space validation failed: {0}")]
    FlatValidation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
