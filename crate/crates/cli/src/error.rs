use sbl_core::SolverError;
use thiserror::Error;

/// Top-level CLI failure, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparseable or invalid configuration. Exit 2.
    #[error("{0}")]
    Config(String),

    /// A requested check did not hold on the computed data. Exit 1.
    #[error("check failed: {0}")]
    Check(String),

    /// The solver gave up mid-run. Exit 3.
    #[error("solver error: {0}")]
    Solver(SolverError),

    /// Filesystem trouble while emitting artifacts. Exit 3.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 1,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidConfig(msg) => CliError::Config(msg),
            other => CliError::Solver(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
