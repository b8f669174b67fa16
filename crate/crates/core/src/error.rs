use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("extension degree {0} out of range")]
    DegreeOutOfRange(u32),
    #[error("field of order {order} exceeds the cap {cap}")]
    FieldTooLarge { order: u128, cap: u64 },
    #[error("modulus rejected: {0}")]
    BadModulus(String),
    #[error("element {index} out of range for a field of order {order}")]
    ElementOutOfRange { index: u64, order: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid line family: {0}")]
    InvalidLineFamily(String),
    #[error("line family contains a slope-zero line")]
    ZeroSlopePresent,
    #[error("line family is not indexed by a product B x C")]
    NonProductFamily,
    #[error("negative value at index {0}")]
    NegativeValue(usize),
    #[error("moment exponent must be at least 2, got {0}")]
    BadExponent(u32),
    #[error("empty domain")]
    EmptyDomain,
    #[error("sizes must be at least 1")]
    ZeroSize,
    #[error("requested {requested} elements from a field of order {order}")]
    SizeTooLarge { requested: u64, order: u32 },
    #[error("bad family descriptor: {0}")]
    BadDescriptor(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
