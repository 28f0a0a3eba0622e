use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("wav decode error in {path}: malformed `{field}`: {detail}")]
    WavDecode {
        path: PathBuf,
        field: &'static str,
        detail: String,
    },

    #[error("unsupported audio format in {path}: {detail}")]
    UnsupportedFormat { path: PathBuf, detail: String },

    #[error("invalid audio clip `{id}`: {reason}")]
    InvalidClip { id: String, reason: String },

    #[error("clip `{id}` has sample rate {actual} Hz, expected {expected} Hz")]
    SampleRate { id: String, expected: u32, actual: u32 },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("feature cache {path}: {detail}")]
    Cache { path: PathBuf, detail: String },

    #[error("feature cache {path}: truncated payload, expected {expected} bytes, found {actual}")]
    CacheTruncated {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("feature cache {path}: format version {found}, expected {expected}")]
    CacheVersion {
        path: PathBuf,
        expected: u32,
        found: u32,
    },

    #[error("checkpoint {path}: {detail}")]
    Checkpoint { path: PathBuf, detail: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("batch norm running statistics are uninitialized; run at least one training update first")]
    UninitializedStats,

    #[error("non-finite gradient in parameter group `{group}`")]
    NonFiniteGradient { group: String },

    #[error("{0}")]
    Augment(String),

    #[error("{0}")]
    Eval(String),

    #[error("{0}")]
    Training(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
