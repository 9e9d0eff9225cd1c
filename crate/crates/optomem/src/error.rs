use std::path::PathBuf;

use optomem_core::Error as CoreError;

/// Failures of a CLI command, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad config, arguments or input files.
    #[error("{0}")]
    Validation(String),
    /// The integrator or analysis broke down on valid input.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Built-in checks ran but did not meet their tolerances.
    #[error("verification failed: {0}")]
    Verification(String),
    /// Reading or writing a file failed.
    #[error("{path}: {source}")]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::StepSizeUnderflow { .. } | CoreError::NonFinite { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
