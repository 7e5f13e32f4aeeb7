//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the detection and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric or structural parameter violated its documented constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two buffers that must share dimensions do not.
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, got {width}x{height}")]
    DimensionMismatch {
        expected_width: usize,
        expected_height: usize,
        width: usize,
        height: usize,
    },

    /// A mathematical function was evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation that needs data was handed an empty input.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image codec error: {0}")]
    Image(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: (usize, usize), got: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected_width: expected.0,
            expected_height: expected.1,
            width: got.0,
            height: got.1,
        }
    }
}
