use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the planner and its supporting modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: I/O error: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{location}: {message}")]
    Format {
        path: PathBuf,
        /// `line N` for text formats, `byte N` for binary ones.
        location: String,
        message: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("window at ({x}, {y}) of size {w}x{h} exceeds {grid_w}x{grid_h} grid")]
    OutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        grid_w: usize,
        grid_h: usize,
    },

    #[error("linear program dimension mismatch: {0}")]
    Dimension(String),

    #[error("equilibrium check indeterminate: {0}")]
    Indeterminate(String),

    #[error("no grasp: {0}")]
    NoGrasp(String),

    #[error("plan JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
