use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid catalog: {0}")]
    InvalidCatalog(String),

    #[error("invalid join graph: {0}")]
    InvalidGraph(String),

    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("plan space too large: {tables} tables exceeds the enumeration bound of {bound}")]
    EnumerationBound { tables: usize, bound: usize },

    #[error("execution error: {0}")]
    Execution(String),

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line harness.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Adapter(_) => 2,
            Error::Execution(_) => 3,
            _ => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Config("x".into()).exit_code(), 1);
        assert_eq!(Error::InvalidArgument("x".into()).exit_code(), 1);
        assert_eq!(Error::Adapter("x".into()).exit_code(), 2);
        assert_eq!(Error::Execution("x".into()).exit_code(), 3);
    }
}
