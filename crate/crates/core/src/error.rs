use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, NvError>;

#[derive(Debug, Error)]
pub enum NvError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution insufficient: {0}")]
    ResolutionInsufficient(String),

    #[error("integer overflow in exact coefficient arithmetic (n = {n})")]
    Overflow { n: usize },

    #[error("blow-up reached at t = {t}: log-argument {denominator} <= 0 at ({x}, {y})")]
    BlowupReached { t: f64, x: f64, y: f64, denominator: f64 },

    #[error("instability detected at t = {time} (blow-up suspected: {blowup_suspected})")]
    Instability { time: f64, blowup_suspected: bool },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl NvError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        NvError::Io { path: path.into(), source }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        NvError::InvalidArgument(msg.into())
    }
}
