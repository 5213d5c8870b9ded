use std::path::PathBuf;

/// Errors of the experiment harness, file formats and CLI.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] stit_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("schema version {found:?} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: Option<u64>, expected: u64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error("acceptance check failed: {0}")]
    Assertion(String),
}

pub type LabResult<T> = Result<T, LabError>;

impl LabError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        LabError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Machine-readable error code printed by the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            LabError::Core(_) => "runtime",
            LabError::Io { .. } => "io",
            LabError::Parse { .. } => "parse",
            LabError::SchemaVersionMismatch { .. } => "schema_version",
            LabError::Config(_) => "config",
            LabError::Assertion(_) => "assert",
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for failed
    /// acceptance checks, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            LabError::Assertion(_) => 3,
            _ => 1,
        }
    }
}
