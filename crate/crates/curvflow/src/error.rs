use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use curvflow_core::estimates::MonitorReport;

use crate::config::{ConfigError, FieldError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_MONITOR: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("numerical abort ({kind}): {message}")]
    Numerical { kind: String, message: String },
    #[error("{} monitor(s) failed", .0.len())]
    MonitorFailure(Vec<MonitorReport>),
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    exit_code: i32,
    message: String,
    details: serde_json::Value,
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: e.to_string(),
        }
    }

    /// Single-field validation error.
    pub fn invalid(field: &str, message: String) -> Self {
        CliError::Config(ConfigError::ValidationError {
            errors: vec![FieldError {
                field: field.into(),
                message,
            }],
        })
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::MonitorFailure(_) => EXIT_MONITOR,
        }
    }

    fn kind(&self) -> &str {
        match self {
            CliError::Config(ConfigError::ParseError { .. }) => "ParseError",
            CliError::Config(ConfigError::ValidationError { .. }) => "ValidationError",
            CliError::Config(ConfigError::Io { .. }) | CliError::Io { .. } => "IoError",
            CliError::Usage(_) => "UsageError",
            CliError::Numerical { kind, .. } => kind,
            CliError::MonitorFailure(_) => "MonitorFailure",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let details = match self {
            CliError::Config(c) => serde_json::to_value(c).unwrap_or_default(),
            CliError::MonitorFailure(r) => serde_json::to_value(r).unwrap_or_default(),
            _ => json!(null),
        };
        let doc = ErrorDoc {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
            details,
        };
        serde_json::to_string_pretty(&doc).expect("error document serializes")
    }
}
