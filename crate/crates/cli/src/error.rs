use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Solver(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Serialize)]
struct Report<'a> {
    error: &'a str,
    message: String,
    exit_code: u8,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "invalid_config",
            CliError::Solver(_) => "solver_failure",
            CliError::Io { .. } => "io_failure",
        }
    }

    /// One-line JSON report for stderr.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Report {
            error: self.kind(),
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .expect("error report serialises")
    }
}

impl From<wgqed::Error> for CliError {
    fn from(err: wgqed::Error) -> Self {
        if err.is_invalid_input() {
            CliError::Config(err.to_string())
        } else {
            CliError::Solver(err.to_string())
        }
    }
}
