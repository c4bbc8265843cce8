use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Validation(#[from] ValidationReport),

    /// A line-addressable input (JSON Lines, CSV) failed to parse.
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    /// A file broke its format contract (PGM header, GeoJSON shape, sidecar layout).
    #[error("{0}")]
    Format(String),

    #[error("{0}")]
    Invalid(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {actual_w}x{actual_h}")]
    DimensionMismatch {
        expected_w: u32,
        expected_h: u32,
        actual_w: u32,
        actual_h: u32,
    },

    #[error("missing descriptor entry for ad {0}")]
    MissingDescriptor(String),

    #[error("key sets differ: {0}")]
    KeyMismatch(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
