//! Batch front-end: configuration, runs, sweeps, convergence ladders, and
//! the CSV/JSON artifacts they leave on disk.

pub mod analysis;
pub mod audit;
pub mod config;
pub mod converge;
pub mod output;
pub mod runner;
pub mod sweep;

pub use config::{ModelConfig, RunConfig, RunKind};
pub use converge::{converge, Ladder, Rung};
pub use runner::{execute, prepare, Outcome, Prepared, Resolution};
pub use sweep::{sweep, SweepOutcome};

use heomflux_core::Error;

/// Default thread count when `--threads` is not given.
pub const THREADS_ENV: &str = "HEOMFLUX_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Convergence(_) => 2,
            RunError::Audit(_) => 3,
        }
    }

    /// Same kind of error with `ctx` prepended to the message.
    pub fn context(&self, ctx: impl std::fmt::Display) -> Self {
        match self {
            RunError::Config(m) => RunError::Config(format!("{ctx}: {m}")),
            RunError::Convergence(m) => RunError::Convergence(format!("{ctx}: {m}")),
            RunError::Audit(m) => RunError::Audit(format!("{ctx}: {m}")),
            RunError::Io(m) => RunError::Io(format!("{ctx}: {m}")),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. }
            | Error::NonFinite { .. }
            | Error::HierarchyTooLarge { .. } => RunError::Convergence(e.to_string()),
            other => RunError::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
