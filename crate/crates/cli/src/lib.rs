//! Experiment driver for the exploration-learning bandit policies: config
//! parsing, single runs with per-round CSV logs, grid sweeps with
//! max/min/mean/median summaries plus the two meta-policy rows, and
//! plot-data emission.

pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;

use thiserror::Error;

/// Harness-level failures, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid or incomplete configuration (exit code 2).
    #[error("config error: {0}")]
    Config(String),

    /// Unreadable, malformed, or inconsistent data (exit code 3).
    #[error("data error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn data_err(err: impl std::fmt::Display) -> CliError {
    CliError::Data(err.to_string())
}
