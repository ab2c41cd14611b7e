//! Exact cyclic dyadic Fast Hough Transform on `2^p × 2^p` images.
//!
//! The forward transform integrates an image along every dyadic pattern of
//! the canonical quadrant (mostly horizontal lines going down to the right),
//! wrapping cyclically in rows. Its transpose is obtained from the forward
//! transform by flipping rows on both sides, and the remaining quadrants
//! reduce to the canonical one through flips and transposition.

mod image;
mod pattern;
mod transform;

use thiserror::Error;

pub use image::{log2_exact, GrayImage, Pixel};
pub(crate) use pattern::indentation_unchecked;
pub use pattern::{indentation, indentation_matrix, pattern, PatternId};
pub use transform::{
    fht_forward, fht_forward_counted, fht_quadrant, fht_transposed, flip_rows, OpCount, Quadrant,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FhtError {
    #[error("{what} = {value} is out of range for side {side}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        side: usize,
    },
    #[error("image side {side} is not a power of two")]
    NotPowerOfTwo { side: usize },
    #[error("expected {expected} pixels, got {actual}")]
    DataLength { expected: usize, actual: usize },
}
