use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("input error: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("value out of range at row {row}, column `{column}`: {value}")]
    RangeViolation {
        row: usize,
        column: String,
        value: String,
    },

    #[error("weights sum to {sum}, expected 1 (tolerance 1e-9)")]
    WeightSum { sum: f64 },

    /// Conditional expectation requested over a zero-mass event.
    #[error("event has no members")]
    EmptyEvent,

    #[error("run stopped after {steps} steps without converging")]
    TruncatedRun { steps: u64 },

    #[error("replay error: {0}")]
    Replay(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
