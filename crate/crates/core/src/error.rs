use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u32, message: String },

    #[error("topology has {usable} usable node(s); at least 2 are required")]
    EmptyTopology { usable: usize },

    #[error("invalid topology: {0}")]
    InvalidTopology(String),

    #[error("invalid coordinate (lat {lat}, lon {lon}); expected |lat| <= 90 and |lon| <= 180")]
    InvalidCoordinate { lat: f64, lon: f64 },

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("no path from `{src}` to `{dst}`")]
    NoPath { src: String, dst: String },

    #[error("{0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "exact solver refuses {count} candidates (limit {limit}); \
         use the double-greedy solver or raise the enumeration limit"
    )]
    TooManyCandidates { count: usize, limit: usize },

    /// The io error is part of the message rather than a source, so error
    /// chains do not print it twice.
    #[error("{path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), err: source }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
