use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input that could not be tokenized at all.
    #[error("parse error at line {line}, offset {offset}: {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },

    /// Structurally valid input missing or violating a declared field.
    #[error("schema error: {0}")]
    Schema(String),

    /// A documented precondition was violated by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The data itself cannot support the requested operation.
    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Corrupt, truncated, or otherwise unreadable model file.
    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("unsupported model format version {found} (this build reads up to {supported})")]
    ModelVersion { found: u8, supported: u8 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
