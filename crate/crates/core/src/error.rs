use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration (unknown kind, bad level, stage order).
    #[error("configuration error: {0}")]
    Config(String),

    /// A parameter is outside the range an operation can honour.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("association error: {0}")]
    Association(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Sequence contents disagree with the expected layout.
    #[error("invalid sequence {path}: {reason}")]
    Sequence { path: PathBuf, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn image(path: impl Into<PathBuf>, source: image::ImageError) -> Self {
        Error::Image {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at_frame(self, frame: usize) -> Self {
        match self {
            e @ Error::Frame { .. } => e,
            e => Error::Frame {
                frame,
                source: Box::new(e),
            },
        }
    }

    /// True for failures caused by the filesystem or codecs rather than by
    /// the data or configuration.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } | Error::Image { .. } => true,
            Error::Frame { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
