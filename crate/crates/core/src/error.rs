use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the ndvd pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed image: {0}")]
    Image(String),

    #[error("malformed manifest: {0}")]
    Manifest(String),

    #[error("frame dimensions differ: {a_w}x{a_h} vs {b_w}x{b_h}")]
    DimensionMismatch {
        a_w: usize,
        a_h: usize,
        b_w: usize,
        b_h: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    #[error("solver did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("model not trained")]
    Untrained,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported format version: {0}")]
    Version(String),

    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
