use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    #[error("target dimensions must be at least 1x1")]
    ZeroDimension,

    #[error("invalid class label {0} (expected 0..=3)")]
    InvalidLabel(u8),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("atmospheric light has a zero channel; cannot normalize")]
    ZeroAtmosphericLight,

    #[error("fixed placement failed: {0}")]
    Placement(String),

    #[error("split counts sum to {0} but dataset has {1} pairs")]
    SplitMismatch(usize, usize),

    #[error("config declares n = {expected} source pairs but {got} were provided")]
    SourceCount { expected: usize, got: usize },

    #[error("duplicate sample id '{0}'")]
    DuplicateId(String),

    #[error("unknown sample id '{0}'")]
    UnknownId(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported png: {0}")]
    PngFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error("png decode: {0}")]
    PngDecode(#[from] png::DecodingError),

    #[error("png encode: {0}")]
    PngEncode(#[from] png::EncodingError),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<std::path::PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
