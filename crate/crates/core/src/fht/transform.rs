use super::{GrayImage, Pixel};

/// Orientation family of the lines a transform integrates along.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quadrant {
    /// Mostly horizontal lines whose row grows with the column. The canonical case.
    HorizontalDown,
    /// Mostly horizontal lines whose row decreases with the column.
    HorizontalUp,
    /// Mostly vertical lines whose column grows with the row.
    VerticalRight,
    /// Mostly vertical lines whose column decreases with the row.
    VerticalLeft,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [
        Quadrant::HorizontalDown,
        Quadrant::HorizontalUp,
        Quadrant::VerticalRight,
        Quadrant::VerticalLeft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quadrant::HorizontalDown => "horizontal-down",
            Quadrant::HorizontalUp => "horizontal-up",
            Quadrant::VerticalRight => "vertical-right",
            Quadrant::VerticalLeft => "vertical-left",
        }
    }

    pub fn parse(s: &str) -> Option<Quadrant> {
        Quadrant::ALL.into_iter().find(|q| q.name() == s)
    }
}

/// Number of additions performed by one transform call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OpCount {
    pub additions: u64,
}

/// Bottom-up halving scheme.
///
/// Before stage `w` every block of `w` adjacent columns holds, in its own
/// columns `0..w`, the partial sums of all width-`w` patterns of that block
/// indexed by `[start row][shift]`. Two neighbouring blocks merge into one of
/// width `2w`: a pattern with shift `T` follows the left half with shift
/// `T / 2` and continues into the right half, `T - T / 2` rows lower, with the
/// same half-shift.
fn butterfly<T: Pixel, const COUNT: bool>(src: &[T], n: usize) -> (Vec<T>, u64) {
    debug_assert_eq!(src.len(), n * n);
    let mut cur = src.to_vec();
    let mut next = vec![T::zero(); n * n];
    let mask = n - 1;
    let mut additions = 0u64;
    let mut w = 1;
    while w < n {
        for s in 0..n {
            let out = &mut next[s * n..(s + 1) * n];
            let row = &cur[s * n..(s + 1) * n];
            for b in (0..n).step_by(2 * w) {
                for shift in 0..2 * w {
                    let half = shift >> 1;
                    let lower = ((s + shift - half) & mask) * n;
                    out[b + shift] = row[b + half] + cur[lower + b + w + half];
                    if COUNT {
                        additions += 1;
                    }
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        w *= 2;
    }
    (cur, additions)
}

/// Canonical Fast Hough Transform.
///
/// Output pixel `(s, t)` holds the sum of the input along the pattern that
/// starts at row `s` of column 0 and has shift `t`:
/// `O(s, t) = Σ_x I((s + H(x, t)) mod n, x)`. Runs in `n²·log2(n)` additions.
pub fn fht_forward<T: Pixel>(image: &GrayImage<T>) -> GrayImage<T> {
    let (data, _) = butterfly::<T, false>(image.data(), image.side());
    GrayImage::from_vec(image.side(), data).expect("butterfly preserves size")
}

/// [`fht_forward`] that also reports how many additions it performed.
pub fn fht_forward_counted<T: Pixel>(image: &GrayImage<T>) -> (GrayImage<T>, OpCount) {
    let (data, additions) = butterfly::<T, true>(image.data(), image.side());
    let out = GrayImage::from_vec(image.side(), data).expect("butterfly preserves size");
    (out, OpCount { additions })
}

/// Reverses the row order: row `i` of the output is row `n − 1 − i` of the input.
pub fn flip_rows<T: Pixel>(image: &GrayImage<T>) -> GrayImage<T> {
    let n = image.side();
    let mut data = Vec::with_capacity(n * n);
    for y in (0..n).rev() {
        data.extend_from_slice(image.row(y));
    }
    GrayImage::from_vec(n, data).expect("flip preserves size")
}

/// Transpose of the canonical transform, `flip ∘ FHT ∘ flip`.
///
/// Output pixel `(y, x)` sums the Hough-space values of every pattern through
/// image pixel `(y, x)`, which makes this the back projection of a Hough image.
pub fn fht_transposed<T: Pixel>(image: &GrayImage<T>) -> GrayImage<T> {
    flip_rows(&fht_forward(&flip_rows(image)))
}

/// Transform for any quadrant, or its exact adjoint when `transposed` is set.
///
/// Horizontal-up lines are handled by flipping rows around the canonical
/// transform; vertical quadrants transpose the image first. The result always
/// stays in Hough coordinates `(start, shift)` of the reduced problem.
pub fn fht_quadrant<T: Pixel>(image: &GrayImage<T>, q: Quadrant, transposed: bool) -> GrayImage<T> {
    match (q, transposed) {
        (Quadrant::HorizontalDown, false) => fht_forward(image),
        (Quadrant::HorizontalDown, true) => fht_transposed(image),
        (Quadrant::HorizontalUp, false) => flip_rows(&fht_forward(&flip_rows(image))),
        // adjoint of flip·F·flip is flip·Fᵀ·flip = F
        (Quadrant::HorizontalUp, true) => fht_forward(image),
        (Quadrant::VerticalRight, false) => fht_forward(&image.transpose()),
        (Quadrant::VerticalRight, true) => fht_transposed(image).transpose(),
        (Quadrant::VerticalLeft, false) => {
            fht_quadrant(&image.transpose(), Quadrant::HorizontalUp, false)
        }
        (Quadrant::VerticalLeft, true) => {
            fht_quadrant(image, Quadrant::HorizontalUp, true).transpose()
        }
    }
}
