use std::path::PathBuf;

use crate::mask::GridShape;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {height}x{width}")]
    InvalidShape { height: usize, width: usize },

    #[error("expected {expected} pixels for the grid, got {found}")]
    PixelCount { expected: usize, found: usize },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: GridShape, right: GridShape },

    #[error("sample set must contain at least one mask")]
    EmptySampleSet,

    #[error("unbiased estimator needs at least two masks per set, got {found}")]
    TooFewForUnbiased { found: usize },

    #[error("probability {value} at pixel {index} is outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("paired series length mismatch: {ids} ids, {a} values in a, {b} values in b")]
    LengthMismatch { ids: usize, a: usize, b: usize },

    #[error("paired series is empty")]
    EmptySeries,

    #[error("all {n} paired differences are zero; the test carries no information")]
    AllZeroDifferences { n: usize },

    #[error("no image has a defined value for every model")]
    NoCommonImages,

    #[error("{path}: malformed PGM header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: unsupported maxval {found}, expected {expected}")]
    UnsupportedMaxval {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated payload, expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}: unknown report header `{found}`")]
    UnknownHeader { path: PathBuf, found: String },

    #[error("{path}:{line}: column `{column}` is not a valid value: `{value}`")]
    BadCell {
        path: PathBuf,
        line: u64,
        column: &'static str,
        value: String,
    },

    #[error("dataset layout: {0}")]
    Layout(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
