//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Non-finite or otherwise malformed numeric input.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two grids/fields that must agree in size do not.
    #[error("dimension mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    DimensionMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    /// A matrix that must be inverted is singular or badly conditioned.
    #[error("numerical singularity: {0}")]
    NumericalSingularity(String),

    /// NCC template has zero intensity variance, correlation is undefined.
    #[error("degenerate template: zero intensity variance")]
    DegenerateTemplate,

    /// Text-format parse failure with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Two annotation records share a frame index.
    #[error("duplicate frame {frame} at line {line}")]
    DuplicateFrame { line: usize, frame: u64 },

    /// Annotation records are not sorted by frame index.
    #[error("unsorted frames at line {line}")]
    UnsortedFrames { line: usize },

    /// Bad scenario or tracker configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
