use std::path::PathBuf;

use crate::raster::ColorEncoding;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("encoding mismatch: expected {expected}, found {found}")]
    EncodingMismatch {
        expected: ColorEncoding,
        found: ColorEncoding,
    },
    #[error("unsupported input encoding {0}")]
    UnsupportedEncoding(ColorEncoding),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown enhancement method `{0}`")]
    UnknownMethod(String),
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unknown rating category `{symbol}` at {cell}")]
    UnknownCategory { symbol: String, cell: String },
    #[error("ratings table is incomplete; missing cells: {}", .missing.join(", "))]
    IncompleteTable { missing: Vec<String> },

    #[error("unsupported bit depth in {path}: {detail}")]
    UnsupportedBitDepth { path: PathBuf, detail: String },
    #[error("cannot read image {path}: {source}")]
    Decode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write image {path}: {source}")]
    Encode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    #[error("manifest field `{field}`: {message}")]
    Manifest { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
