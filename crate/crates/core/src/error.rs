use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("invalid phrasing graph: {0}")]
    InvalidGraph(String),

    #[error("phrasing graph contains a cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("non-finite {quantity} at t = {t:.3} s")]
    NonFinite { quantity: &'static str, t: f64 },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {message}", path.display())]
    Asset { path: PathBuf, message: String },

    #[error("audio: {0}")]
    Audio(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn asset_io(path: &Path, err: std::io::Error) -> Self {
        Error::Asset {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by a referenced asset file rather than the
    /// session config itself.
    pub fn is_asset_error(&self) -> bool {
        matches!(
            self,
            Error::Asset { .. } | Error::InvalidTrajectory(_) | Error::InvalidGraph(_) | Error::Cycle(_)
        )
    }
}
