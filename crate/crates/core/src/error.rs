use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel parameter: {0}")]
    Parameter(String),

    #[error("cannot parse kernel spec `{spec}`: {reason}")]
    KernelSpec { spec: String, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("size mismatch: {0}")]
    Shape(String),

    #[error("matrix of {entries} entries exceeds the limit of {limit}")]
    TooLarge { entries: usize, limit: usize },

    #[error("matrix is not positive definite (pivot {index} = {pivot:e})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("triangular matrix is singular at row {0}")]
    Singular(usize),

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("degenerate center {index}: power value {power:e} below breakdown tolerance")]
    Degenerate { index: usize, power: f64 },

    #[error("negative squared power value {0:e} beyond round-off")]
    NegativePower(f64),

    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },

    #[error("all candidate sets are exhausted")]
    Exhausted,

    #[error("point-set file: {0}")]
    PointFile(String),
}
