use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image dimensions must be positive, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("pixel buffer holds {got} pixels, expected {expected}")]
    PixelCount { expected: usize, got: usize },

    #[error("image sizes differ: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("window side must be an odd integer >= 3, got {0}")]
    WindowSize(usize),

    #[error("unknown filter `{0}`")]
    UnknownFilter(String),

    #[error("filter `{filter}`: {message}")]
    FilterParam { filter: String, message: String },

    #[error("invalid noise configuration: {0}")]
    NoiseConfig(String),

    #[error("NCD undefined: reference image is black but the test image differs")]
    NcdUndefined,

    #[error("PPM parse error at byte {offset}: {message}")]
    Ppm { offset: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("benchmark configuration: {0}")]
    BenchConfig(String),

    #[error("no image could be processed")]
    NoImages,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(filter: &str, message: impl Into<String>) -> Self {
        Error::FilterParam {
            filter: filter.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
