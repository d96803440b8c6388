use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The environment has no more rounds to play.
    #[error("environment exhausted")]
    EndOfStream,

    /// Regret accounting needs the counterfactual optimal reward on every
    /// record; environments that do not reveal it cannot be scored.
    #[error("round {t} is missing the counterfactual optimal reward")]
    MissingCounterfactual { t: u64 },

    /// No split satisfies the minimum leaf weight; callers treat this as a
    /// stop signal.
    #[error("no feasible split")]
    InfeasibleSplit,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
