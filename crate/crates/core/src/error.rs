use std::path::PathBuf;

/// Errors raised by the engine. Each variant maps onto one CLI exit code.
#[derive(Debug, thiserror::Error)]
pub enum EcgError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EcgError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        EcgError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            EcgError::InvalidArgument(_) => 1,
            EcgError::Data(_) | EcgError::Io { .. } | EcgError::Shape(_) => 2,
            EcgError::Checkpoint(_) => 3,
            EcgError::Numeric(_) => 4,
        }
    }
}

pub type Result<T, E = EcgError> = std::result::Result<T, E>;
