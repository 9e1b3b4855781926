use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    CheckFailed(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Invariant(_) => "invariant",
            CliError::CheckFailed(_) => "check_failed",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::CheckFailed(_) => 4,
        }
    }

    /// One-line machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let body = ErrorJson {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        };
        serde_json::to_string(&body).expect("error bodies serialize")
    }
}
