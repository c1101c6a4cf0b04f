use std::path::PathBuf;

use hocf_core::{FormatError, HocfError};

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: FormatError },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(#[from] HocfError),
    /// A study ran to completion but missed its target.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Format { .. } | CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numeric(HocfError::NoConvergence { .. }) => EXIT_NO_CONVERGENCE,
            // a system file that parses but violates an invariant is still
            // a configuration problem
            CliError::Numeric(
                HocfError::PositivityViolation { .. }
                | HocfError::ZeroParameter(_)
                | HocfError::NotObservable,
            ) => EXIT_CONFIG,
            CliError::Numeric(_) | CliError::Check(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
