use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate response: {0}")]
    DegenerateResponse(String),

    #[error("frequency grid mismatch: {left} vs {right} points")]
    GridMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge after {iterations} iterations (n = {n})")]
    NoConvergence { n: usize, iterations: usize },

    #[error("non-finite training loss at step {step} (batch seed {seed}, draw index {draw_index})")]
    NonFiniteLoss {
        step: u64,
        seed: u64,
        draw_index: u64,
    },

    #[error("parse error at byte offset {offset}: {message}")]
    Parse { offset: u64, message: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateResponse(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numbers rather than by inputs or I/O.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DegenerateResponse(_) | Error::NoConvergence { .. } | Error::NonFiniteLoss { .. }
        )
    }
}
