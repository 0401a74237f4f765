use thiserror::Error;

/// Errors raised by the classification and forecasting pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AidError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("series is empty")]
    EmptySeries,

    #[error("period index {index} is out of range for a series of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("every observation is flagged; nothing remains")]
    EmptyRemainder,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-finite likelihood: {0}")]
    NonFiniteLikelihood(String),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("no demand remains after stockout removal")]
    EmptyDemand,

    #[error("in-sample history has no variation in first differences")]
    FlatHistory,

    #[error("no positive truth labels; true-positive rate is undefined")]
    UndefinedTpr,

    #[error("missing feature: {0}")]
    MissingFeature(String),
}

pub type Result<T> = std::result::Result<T, AidError>;
