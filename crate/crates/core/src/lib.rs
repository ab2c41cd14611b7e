//! Fast Hough Transform layers for vanishing-point detection.
//!
//! * [`fht`]: the cyclic dyadic Fast Hough Transform, its transpose, and the
//!   four line quadrants.
//! * [`oracle`]: brute-force references (explicit transform matrix, classical
//!   Hough accumulator, least-squares line intersection) and the structural
//!   checks on the transform matrix.
//! * [`nn`]: a small dense network engine with convolution, padding,
//!   activation, FHT and transposed FHT layers, SGD and Adam training, and
//!   gradient checks.
//! * [`vp`]: synthetic vanishing-point data, grid evaluation, corruption
//!   experiments and a classical non-learning baseline.
//! * [`pgm`]: binary PGM reading and writing.
//!
//! ```
//! use fhtnet::fht::{fht_forward, fht_transposed, GrayImage};
//!
//! let ones = GrayImage::filled(3, 1i64);
//! assert!(fht_forward(&ones).data().iter().all(|&v| v == 8));
//! assert!(fht_transposed(&ones).data().iter().all(|&v| v == 8));
//! ```

pub mod fht;
pub mod fsutil;
pub mod nn;
pub mod oracle;
pub mod pgm;
pub mod vp;

// The guide under book/ is compiled as doc-tests so its snippets stay in sync
// with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/patterns.md")]
    mod patterns {}
    #[doc = include_str!("../../../book/src/fast-transform.md")]
    mod fast_transform {}
    #[doc = include_str!("../../../book/src/transpose.md")]
    mod transpose {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/layers.md")]
    mod layers {}
    #[doc = include_str!("../../../book/src/vanishing-points.md")]
    mod vanishing_points {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
