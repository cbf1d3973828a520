use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid Gram matrix: {0}")]
    InvalidGram(String),
    #[error("lattice is degenerate")]
    DegenerateLattice,
    #[error("lattice is not definite")]
    IndefiniteLattice,
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector is not primitive")]
    NotPrimitive,
    #[error("vector is not isotropic")]
    NotIsotropic,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("discriminant group of order {order} exceeds the enumeration bound {bound}")]
    GroupTooLarge { order: u64, bound: u64 },
    #[error("adjoined vector does not pair integrally with the lattice")]
    NotIntegral,
    #[error("adjoined vector has odd norm")]
    NotEven,
    #[error("{0} is not an odd prime coprime to the discriminant")]
    BadPrime(u64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("fiber classes do not group consistently: {0}")]
    InconsistentGrouping(String),
    #[error("graph has {0} vertices, at most 24 are supported")]
    GraphTooLarge(usize),
    #[error("search limit reached: {0}")]
    SearchLimit(String),
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
