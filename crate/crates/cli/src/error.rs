use std::path::PathBuf;

use thiserror::Error;

/// Exit status of a successful command that still signals a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
    RayStopped,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::VerificationFailed => 1,
            Status::RayStopped => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid scenario: {0}")]
    Config(String),

    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] mhdpol_core::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Core(mhdpol_core::Error::RayStopped { .. }) => 3,
            CliError::Config(_) | CliError::Json(_) | CliError::Io { .. } | CliError::Core(_) => 2,
        }
    }
}
