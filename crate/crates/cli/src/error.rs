use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

/// Failures that end a run before a verdict exists. Verdict outcomes (a
/// failing check, an unrecognized kernel) are not errors; they map to exit
/// codes 1 and 2 in `main`.
#[derive(Debug, Error)]
pub enum CliError {
    /// Arguments that parse but violate a precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// Input data that violates the command's contract.
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot read {}: {source}", path.display())]
    NoInput {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write report: {0}")]
    Write(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => 64,
            CliError::Input(_) => 65,
            CliError::NoInput { .. } => 66,
            CliError::Write(_) => 74,
        })
    }
}
