use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value lies outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid scenario or construction parameters. `path` names the
    /// offending configuration field when one exists.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("singular regularized Gram matrix at subcarrier {subcarrier} (gamma = {gamma})")]
    SingularSubcarrier { subcarrier: usize, gamma: f64 },

    #[error("precoder has zero total power")]
    ZeroPrecoder,

    #[error("framing error: {0}")]
    Framing(String),

    #[error("frame not found: peak metric {metric:.3e} below threshold {threshold:.3e}")]
    FrameNotFound { metric: f64, threshold: f64 },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
