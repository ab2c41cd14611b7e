//! Brute-force references used to check the fast code paths.
//!
//! Nothing here is fast. The explicit transform matrix stores `n³` ones, the
//! classical Hough accumulator is cubic, and the structural checks build the
//! permuted matrices they compare.

mod hough;
mod lines;
mod matrix;

use thiserror::Error;

pub use hough::{classical_hough, rasterize_line, HoughAccumulator};
pub use lines::{ls_intersection, LineParams};
pub use matrix::{
    build_fht_matrix, verify_lemmas, verify_matrix, LemmaReport, SparseBinaryMatrix, MAX_LEMMA_P,
    MAX_MATRIX_P,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("p = {p} exceeds the supported maximum {max}")]
    TooLarge { p: u32, max: u32 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
