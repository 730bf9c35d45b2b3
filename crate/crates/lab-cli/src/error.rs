use std::process::ExitCode;

use cat_teleport::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Engine(Error::InvalidArgument(_) | Error::Unsupported(_)) => ExitCode::from(2),
            _ => ExitCode::from(1),
        }
    }
}
