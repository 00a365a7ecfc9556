use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced to the shell, each mapped to an exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("comparison failed: {0}")]
    Compare(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Compare(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Wraps a library error raised while checking inputs.
pub fn invalid(context: &str) -> impl FnOnce(recoherence::Error) -> CliError + '_ {
    move |e| CliError::Validation(format!("{context}: {e}"))
}

/// Wraps a library error raised mid-run.
pub fn numerical(context: &str) -> impl FnOnce(recoherence::Error) -> CliError + '_ {
    move |e| CliError::Numerical(format!("{context}: {e}"))
}

pub type CliResult<T> = Result<T, CliError>;
