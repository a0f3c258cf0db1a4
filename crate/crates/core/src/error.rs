use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("backward called without a cached forward pass ({0})")]
    MissingCache(&'static str),

    #[error("batch norm in eval mode needs initialized running statistics")]
    UninitializedRunningStats,

    #[error("label {0} out of range (expected 0 = cg or 1 = pg)")]
    LabelOutOfRange(usize),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: image is {width}x{height}, smaller than the {crop}x{crop} crop")]
    Undersized { path: PathBuf, width: u32, height: u32, crop: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("embedded kernel asset corrupted: {0}")]
    AssetCorrupted(String),

    #[error("gradient check failed: {0}")]
    GradCheck(String),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn unknown(kind: &'static str, name: impl Into<String>) -> Self {
        Error::Unknown { kind, name: name.into() }
    }

    /// Process exit code: 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFinite(_) | Error::GradCheck(_) => 3,
            Error::Data(_)
            | Error::Io { .. }
            | Error::Image { .. }
            | Error::Undersized { .. }
            | Error::Checkpoint(_)
            | Error::AssetCorrupted(_)
            | Error::LabelOutOfRange(_) => 2,
            _ => 1,
        }
    }
}
