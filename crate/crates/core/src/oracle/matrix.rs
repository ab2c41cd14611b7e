use std::collections::HashSet;

use super::OracleError;
use crate::fht::indentation_unchecked;

/// Largest exponent [`build_fht_matrix`] accepts (`n³` stored ones).
pub const MAX_MATRIX_P: u32 = 6;
/// Largest exponent the lemma checks run on.
pub const MAX_LEMMA_P: u32 = 5;

/// Explicit 0/1 matrix of the transform on `n × n` images, stored as the
/// positions of its ones.
///
/// Pixels are enumerated row-wise (`q = y·n + x`) and Hough cells the same way
/// (`m = s·n + t`). Entry `(m, q)` is one when input pixel `q` lies on the
/// pattern summed into output pixel `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseBinaryMatrix {
    side: usize,
    ones: Vec<(usize, usize)>,
}

impl SparseBinaryMatrix {
    fn from_unsorted(side: usize, mut ones: Vec<(usize, usize)>) -> Self {
        ones.sort_unstable();
        ones.dedup();
        SparseBinaryMatrix { side, ones }
    }

    /// Image side `n`.
    pub fn side(&self) -> usize {
        self.side
    }

    /// Matrix dimension `n²`.
    pub fn dim(&self) -> usize {
        self.side * self.side
    }

    pub fn ones(&self) -> &[(usize, usize)] {
        &self.ones
    }

    pub fn contains(&self, m: usize, q: usize) -> bool {
        self.ones.binary_search(&(m, q)).is_ok()
    }

    /// Flips one entry between 0 and 1.
    pub fn toggle(&mut self, m: usize, q: usize) {
        match self.ones.binary_search(&(m, q)) {
            Ok(i) => {
                self.ones.remove(i);
            }
            Err(i) => self.ones.insert(i, (m, q)),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_unsorted(self.side, self.ones.iter().map(|&(m, q)| (q, m)).collect())
    }

    /// Index of pixel `q` after flipping image rows.
    fn flip_index(&self, q: usize) -> usize {
        let n = self.side;
        (n - 1 - q / n) * n + q % n
    }

    /// `A·C`: columns permuted by the row flip.
    pub fn times_flip(&self) -> Self {
        Self::from_unsorted(
            self.side,
            self.ones
                .iter()
                .map(|&(m, q)| (m, self.flip_index(q)))
                .collect(),
        )
    }

    /// `C·A·C`.
    pub fn flip_conjugate(&self) -> Self {
        Self::from_unsorted(
            self.side,
            self.ones
                .iter()
                .map(|&(m, q)| (self.flip_index(m), self.flip_index(q)))
                .collect(),
        )
    }

    pub fn is_symmetric(&self) -> bool {
        let set: HashSet<_> = self.ones.iter().copied().collect();
        self.ones.iter().all(|&(m, q)| set.contains(&(q, m)))
    }

    pub fn row_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.dim()];
        for &(m, _) in &self.ones {
            sums[m] += 1;
        }
        sums
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.dim()];
        for &(_, q) in &self.ones {
            sums[q] += 1;
        }
        sums
    }

    /// `A·v` for a row-major image vector.
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![0; self.dim()];
        for &(m, q) in &self.ones {
            out[m] += v[q];
        }
        out
    }

    /// `Aᵀ·v`.
    pub fn apply_transposed(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.dim());
        let mut out = vec![0; self.dim()];
        for &(m, q) in &self.ones {
            out[q] += v[m];
        }
        out
    }

    /// Dense copy; only allowed for `n ≤ 16` (`p ≤ 4`).
    pub fn to_dense(&self) -> Result<Vec<Vec<u8>>, OracleError> {
        if self.side > 16 {
            return Err(OracleError::TooLarge {
                p: self.side.trailing_zeros(),
                max: 4,
            });
        }
        let mut dense = vec![vec![0u8; self.dim()]; self.dim()];
        for &(m, q) in &self.ones {
            dense[m][q] = 1;
        }
        Ok(dense)
    }
}

/// Enumerates every pattern and marks its pixels.
pub fn build_fht_matrix(p: u32) -> Result<SparseBinaryMatrix, OracleError> {
    if p > MAX_MATRIX_P {
        return Err(OracleError::TooLarge {
            p,
            max: MAX_MATRIX_P,
        });
    }
    let n = 1usize << p;
    let mut ones = Vec::with_capacity(n * n * n);
    for s in 0..n {
        for t in 0..n {
            let m = s * n + t;
            for x in 0..n {
                let y = (s + indentation_unchecked(x, t, p)) % n;
                ones.push((m, y * n + x));
            }
        }
    }
    Ok(SparseBinaryMatrix::from_unsorted(n, ones))
}

/// Outcome of the five structural checks on a transform matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub p: u32,
    /// The indentation table read off the matrix is symmetric.
    pub l1: bool,
    /// Every `n × n` block is symmetric.
    pub l2: bool,
    /// Blocks are constant along block diagonals (cyclically).
    pub l3: bool,
    /// `A·C` is symmetric.
    pub l4: bool,
    /// `C·A·C = Aᵀ`.
    pub t1: bool,
}

impl LemmaReport {
    pub fn all_passed(&self) -> bool {
        self.l1 && self.l2 && self.l3 && self.l4 && self.t1
    }

    pub fn checks(&self) -> [(&'static str, bool); 5] {
        [
            ("L1", self.l1),
            ("L2", self.l2),
            ("L3", self.l3),
            ("L4", self.l4),
            ("T1", self.t1),
        ]
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks()
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| *name)
            .collect()
    }
}

/// Builds the matrix for side `2^p` and runs [`verify_matrix`] on it.
pub fn verify_lemmas(p: u32) -> Result<LemmaReport, OracleError> {
    if p > MAX_LEMMA_P {
        return Err(OracleError::TooLarge {
            p,
            max: MAX_LEMMA_P,
        });
    }
    Ok(verify_matrix(&build_fht_matrix(p)?))
}

/// Checks the structure of an explicit transform matrix by direct manipulation.
pub fn verify_matrix(a: &SparseBinaryMatrix) -> LemmaReport {
    let n = a.side();
    let set: HashSet<(usize, usize)> = a.ones().iter().copied().collect();

    // Indentations come from block row 0: the pattern (s = 0, t) has its cell
    // of column x in image row H(x, t).
    let l1 = (|| {
        let mut table = vec![vec![usize::MAX; n]; n];
        for &(m, q) in a.ones() {
            if m < n {
                let (t, y, x) = (m, q / n, q % n);
                if table[x][t] != usize::MAX {
                    return false;
                }
                table[x][t] = y;
            }
        }
        (0..n).all(|x| (0..n).all(|t| table[x][t] != usize::MAX && table[x][t] == table[t][x]))
    })();

    let l2 = a.ones().iter().all(|&(m, q)| {
        let (i, k, j, l) = (m / n, m % n, q / n, q % n);
        set.contains(&(i * n + l, j * n + k))
    });

    let l3 = a.ones().iter().all(|&(m, q)| {
        let (i, k, j, l) = (m / n, m % n, q / n, q % n);
        set.contains(&(((i + 1) % n) * n + k, ((j + 1) % n) * n + l))
    });

    let l4 = a.times_flip().is_symmetric();
    let t1 = a.flip_conjugate() == a.transpose();

    LemmaReport {
        p: n.trailing_zeros(),
        l1,
        l2,
        l3,
        l4,
        t1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_matrices() {
        let a0 = build_fht_matrix(0).unwrap();
        assert_eq!(a0.ones(), &[(0, 0)]);

        // 2×2: pattern (s=0, t=0) is the top row, pixels 0 and 1
        let a1 = build_fht_matrix(1).unwrap();
        assert_eq!(a1.dim(), 4);
        assert!(a1.contains(0, 0) && a1.contains(0, 1));
        assert_eq!(a1.row_sums()[0], 2);
        assert_eq!(a1.to_dense().unwrap()[0], vec![1, 1, 0, 0]);
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            build_fht_matrix(7),
            Err(OracleError::TooLarge { p: 7, .. })
        ));
        assert!(verify_lemmas(6).is_err());
        assert!(build_fht_matrix(5).unwrap().to_dense().is_err());
    }

    #[test]
    fn row_and_column_sums_are_n() {
        for p in 0..=5 {
            let a = build_fht_matrix(p).unwrap();
            let n = 1usize << p;
            assert!(a.row_sums().iter().all(|&c| c == n));
            assert!(a.col_sums().iter().all(|&c| c == n));
        }
    }

    #[test]
    fn all_checks_pass_for_small_sizes() {
        for p in 1..=5 {
            let report = verify_lemmas(p).unwrap();
            assert!(report.all_passed(), "{report:?}");
        }
    }

    #[test]
    fn flipped_bit_breaks_the_transpose_identity() {
        let mut a = build_fht_matrix(2).unwrap();
        a.toggle(1, 6);
        let report = verify_matrix(&a);
        assert!(!report.t1);
        assert!(report.failures().contains(&"T1"));
    }

    #[test]
    fn toggle_is_an_involution() {
        let a = build_fht_matrix(2).unwrap();
        let mut b = a.clone();
        b.toggle(3, 3);
        b.toggle(3, 3);
        assert_eq!(a, b);
    }
}
