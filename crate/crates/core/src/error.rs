use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid rate: {0}")]
    InvalidRate(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("config error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config key `{key}` {constraint}")]
    ConfigRange { key: String, constraint: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn range(key: &str, constraint: impl Into<String>) -> Self {
        Error::ConfigRange {
            key: key.to_string(),
            constraint: constraint.into(),
        }
    }

    /// True for errors that stem from configuration input.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::ConfigParse { .. } | Error::UnknownKey(_) | Error::ConfigRange { .. } | Error::Usage(_)
        )
    }
}
