use std::io;

use planegen_contrastive::{CheckpointError, ContrastiveError};
use planegen_core::benchmark::BenchmarkError;
use planegen_core::pairs::PairExhausted;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("generation budget exhausted: {0}")]
    Budget(String),
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    CheckpointVersion(String),
    #[error("{0}")]
    Checkpoint(String),
    #[error("{0}")]
    Training(String),
}

impl CliError {
    /// 1 I/O and usage, 2 budget exhaustion, 3 divergence, 4 checkpoint version.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Budget(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::CheckpointVersion(_) => 4,
            _ => 1,
        }
    }

    pub fn io(context: impl std::fmt::Display, e: io::Error) -> Self {
        CliError::Io(io::Error::new(e.kind(), format!("{context}: {e}")))
    }
}

impl From<BenchmarkError> for CliError {
    fn from(e: BenchmarkError) -> Self {
        match e {
            BenchmarkError::Io(e) => CliError::Io(e),
            b @ BenchmarkError::BudgetExhausted { .. } => CliError::Budget(b.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<PairExhausted> for CliError {
    fn from(e: PairExhausted) -> Self {
        CliError::Budget(e.to_string())
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        match e {
            v @ CheckpointError::VersionMismatch { .. } => {
                CliError::CheckpointVersion(v.to_string())
            }
            CheckpointError::Io(e) => CliError::Io(e),
            other => CliError::Checkpoint(other.to_string()),
        }
    }
}

impl From<ContrastiveError> for CliError {
    fn from(e: ContrastiveError) -> Self {
        match e {
            d @ ContrastiveError::TrainingDiverged { .. } => CliError::Diverged(d.to_string()),
            other => CliError::Training(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
