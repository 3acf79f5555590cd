use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("hypothesis space too large: T = {total} exceeds limit {limit}")]
    TooManyHypotheses { total: u128, limit: u128 },

    #[error("run truncated after {steps} steps (last time index n = {n})")]
    Truncated { steps: u64, n: u64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
