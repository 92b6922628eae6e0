use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which side of the weak-supervision risk a piece of data belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Similarity,
    Unlabeled,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Similarity => f.write_str("similarity (triplet) side"),
            Side::Unlabeled => f.write_str("unlabeled side"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid class prior {0}: must lie strictly between 0 and 1")]
    InvalidPrior(f64),

    #[error(
        "degenerate class prior pi_plus = {0}: the risk rewrite assumes pi_plus != 1/2 \
         (the mixing coefficients divide by pi_plus - pi_minus)"
    )]
    DegeneratePrior(f64),

    #[error("insufficient data on the {0}: at least one point is required")]
    InsufficientData(Side),

    #[error("invalid discrete domain: {0}")]
    InvalidDomain(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid count {0}: at least one item must be requested")]
    InvalidCount(usize),

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("insufficient pool: {0}")]
    InsufficientPool(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("support of size {size} is too large to enumerate (maximum {max})")]
    EnumerationTooLarge { size: usize, max: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by bad configuration or data rather than the
    /// environment (file system, serialization).
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse { .. })
    }
}
