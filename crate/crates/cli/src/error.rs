use std::fmt;

use serde_json::json;
use tvflow::TvError;

#[derive(Debug)]
pub enum CliError {
    /// The config did not match its schema; `field` is the JSON path.
    Schema { file: String, field: String, message: String },
    Io { path: String, message: String },
    Flow(TvError),
    /// A check ran and failed (certificate, regularity).
    Check(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "schema",
            CliError::Io { .. } => "io",
            CliError::Flow(e) => e.kind(),
            CliError::Check(_) => "check-failed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Flow(_) => 4,
            CliError::Check(_) => 5,
        }
    }

    pub fn schema(file: &str, field: &str, message: impl Into<String>) -> Self {
        CliError::Schema { file: file.into(), field: field.into(), message: message.into() }
    }

    pub fn io(path: impl fmt::Display, err: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), message: err.to_string() }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            CliError::Schema { file, field, .. } => {
                body["file"] = json!(file);
                body["field"] = json!(field);
            }
            CliError::Io { path, .. } => body["path"] = json!(path),
            _ => {}
        }
        json!({ "error": body })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema { field, message, .. } if field.is_empty() || field == "." => write!(f, "{message}"),
            CliError::Schema { field, message, .. } => write!(f, "{field}: {message}"),
            CliError::Io { path, message } => write!(f, "{path}: {message}"),
            CliError::Flow(e) => write!(f, "{e}"),
            CliError::Check(m) => write!(f, "{m}"),
        }
    }
}

impl From<TvError> for CliError {
    fn from(e: TvError) -> Self {
        CliError::Flow(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
