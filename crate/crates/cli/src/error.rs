use std::process::ExitCode;

use thiserror::Error;

/// Command failures, each mapped to a documented exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed command line (exit 2).
    #[error("{0}")]
    Usage(String),
    /// Unreadable, unwritable or malformed files (exit 3).
    #[error("{0}")]
    Io(String),
    /// Invalid flag values or configuration (exit 4).
    #[error("{0}")]
    Config(String),
    /// A verification suite ran and at least one check failed (exit 5).
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const CONFIG: u8 = 4;
    pub const VERIFICATION: u8 = 5;

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Io(_) => Self::IO,
            CliError::Config(_) => Self::CONFIG,
            CliError::Verification(_) => Self::VERIFICATION,
        })
    }
}

impl From<usimul::Error> for CliError {
    fn from(e: usimul::Error) -> Self {
        use usimul::Error as E;
        match e {
            E::Io(_) | E::Json(_) | E::Csv(_) | E::Parse { .. } | E::Shape { .. } | E::InvalidInput(_)
            | E::InsufficientData(_) | E::InsufficientPool(_) => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
