//! Dyadic patterns and the indentation function.
//!
//! A pattern of length `n = 2^p` visits every column exactly once. Its row in
//! column `x` is `s + H(x, t)` (mod `n`), where `s` is the row it starts at in
//! column 0 and `t` is its total shift. The indentation function is
//!
//! ```text
//! H(x, t) = Σ_{r=0}^{p-1} t_r · round(2^r · x / (2^p − 1))
//! ```
//!
//! with `t_r` the binary digits of `t`. Rounding is to the nearest integer;
//! the denominator is odd, so exact halves never occur.

use super::FhtError;

/// A dyadic pattern, identified by its shift and its starting row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatternId {
    /// Total vertical displacement between the first and last column.
    pub t: usize,
    /// Row of the pattern's cell in column 0.
    pub s: usize,
}

impl PatternId {
    pub fn new(t: usize, s: usize, p: u32) -> Result<Self, FhtError> {
        let n = 1usize << p;
        if t >= n {
            return Err(FhtError::OutOfRange {
                what: "t",
                value: t,
                side: n,
            });
        }
        if s >= n {
            return Err(FhtError::OutOfRange {
                what: "s",
                value: s,
                side: n,
            });
        }
        Ok(PatternId { t, s })
    }
}

/// Vertical offset of column `x` within the pattern of shift `t`, for side `2^p`.
pub fn indentation(x: usize, t: usize, p: u32) -> Result<usize, FhtError> {
    let n = 1usize << p;
    if x >= n {
        return Err(FhtError::OutOfRange {
            what: "x",
            value: x,
            side: n,
        });
    }
    if t >= n {
        return Err(FhtError::OutOfRange {
            what: "t",
            value: t,
            side: n,
        });
    }
    Ok(indentation_unchecked(x, t, p))
}

pub(crate) fn indentation_unchecked(x: usize, t: usize, p: u32) -> usize {
    if p == 0 {
        return 0;
    }
    let den = (1u64 << p) - 1;
    let mut h = 0u64;
    for r in 0..p {
        if (t >> r) & 1 == 1 {
            // round(num / den) == floor((2·num + den) / (2·den))
            let num = (x as u64) << r;
            h += (2 * num + den) / (2 * den);
        }
    }
    h as usize
}

/// Full `n × n` table of indentations, indexed `[x][t]`.
pub fn indentation_matrix(p: u32) -> Vec<Vec<usize>> {
    let n = 1usize << p;
    (0..n)
        .map(|x| (0..n).map(|t| indentation_unchecked(x, t, p)).collect())
        .collect()
}

/// Cells `(column x, row y)` of a pattern, one per column, wrapping cyclically in rows.
pub fn pattern(id: PatternId, p: u32) -> Result<Vec<(usize, usize)>, FhtError> {
    let id = PatternId::new(id.t, id.s, p)?;
    let n = 1usize << p;
    Ok((0..n)
        .map(|x| (x, (id.s + indentation_unchecked(x, id.t, p)) % n))
        .collect())
}
