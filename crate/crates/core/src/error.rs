use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the conversion pipeline and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: unsupported image format: {reason}")]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{path}: malformed image: {reason}")]
    MalformedImage { path: PathBuf, reason: String },

    #[error("image has zero width or height")]
    ZeroDimension,

    #[error("pixel buffer of length {actual} does not match {width}x{height}")]
    DimensionMismatch {
        width: usize,
        height: usize,
        actual: usize,
    },

    #[error("histogram has fewer than two separated peaks")]
    NoSecondPeak,

    #[error("image contains no foreground runs")]
    EmptySignature,

    #[error("JSON parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("schema violation at `{field}`: {message}")]
    Schema { field: String, message: String },

    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
