use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate trace: peak equals 5th percentile ({0})")]
    DegenerateTrace(f64),

    #[error("no usable candidate trace among {0} bases")]
    NoCandidate(usize),

    #[error("rate {rate} exceeds capacity {capacity}")]
    LoadExceedsCapacity { rate: f64, capacity: f64 },

    #[error("instance too large for exhaustive search: {n} BSs (max {max})")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("trial {index} panicked: {message}")]
    TrialPanicked { index: usize, message: String },

    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, SimError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SimError {
    SimError::InvalidArgument(msg.into())
}
