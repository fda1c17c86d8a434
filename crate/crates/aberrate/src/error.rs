use std::path::PathBuf;

/// Crate-wide error type. Variants map onto the CLI exit codes:
/// configuration problems exit 1, data/I-O problems exit 2, and
/// numeric failures exit 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad parameter values, inconsistent options.
    #[error("config error: {0}")]
    Config(String),

    /// Missing or malformed input data: files, shapes, formats.
    #[error("data error: {0}")]
    Data(String),

    /// A computation left its valid domain or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error class: 1 config, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) | Error::Io { .. } => 2,
            Error::Numeric(_) => 3,
        }
    }
}
