use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("stroke has no samples")]
    EmptyStroke,

    #[error("stroke needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("invalid stroke sample {index}: {reason}")]
    InvalidSample { index: usize, reason: String },

    #[error("pressure profile is empty")]
    EmptyProfile,

    #[error("pressure value {value} at index {index} is outside [0, 1]")]
    PressureOutOfRange { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("transform length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{method} needs at least {min} points, got {actual}")]
    TooFewPoints {
        method: &'static str,
        min: usize,
        actual: usize,
    },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("invalid dataset: {0}")]
    Dataset(String),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("malformed {what}: {reason}")]
    Malformed { what: &'static str, reason: String },

    #[error("unsupported {what} version {found} (expected {expected})")]
    VersionMismatch {
        what: &'static str,
        found: u64,
        expected: u64,
    },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn in_file(path: &std::path::Path) -> impl FnOnce(Error) -> Error + '_ {
        move |e| match e {
            e @ Error::Io { .. } => e,
            e => Error::File {
                path: path.display().to_string(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            source: Box::new(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
