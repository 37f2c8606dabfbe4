use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Parameters outside their allowed domain.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Input was well-formed but there is nothing to work with.
    #[error("no data: {0}")]
    Data(String),

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("node {node} out of bounds for graph with {n} nodes")]
    Bounds { node: u64, n: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("unknown key: {0}")]
    Lookup(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
