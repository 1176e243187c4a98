use thiserror::Error;

/// Errors raised by model construction, posterior evaluation and the
/// experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("Dirichlet parameter {value} at ({row}, {col}) must be positive and finite")]
    NonPositiveAlpha { row: usize, col: usize, value: f64 },

    #[error("beta argument {0} must be positive and finite")]
    NonPositiveArgument(f64),

    #[error("Stirling bounds need integer arguments >= 1, got {0}")]
    NonIntegerArgument(f64),

    #[error("{total} observations exceed the configured horizon of {horizon}")]
    HorizonExceeded { total: u64, horizon: u64 },

    #[error("composition count {count} exceeds the term limit of {limit}")]
    TooManyTerms { count: u128, limit: u128 },

    #[error("composition count overflows u128")]
    CompositionOverflow,

    #[error("posterior evaluation produced a non-finite value")]
    NonFinite,

    #[error("observations are impossible under every candidate strategy")]
    ImpossibleObservations,

    #[error("empty support")]
    EmptySupport,

    #[error("oracle limits exceeded: {0}")]
    OracleLimits(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
