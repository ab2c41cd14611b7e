//! Blurring a square around the vanishing point, and the sweep over square
//! sizes that measures how much a predictor relies on the point itself.

use rayon::prelude::*;

use super::{evaluate, Sample, VpError, VpPredictor};
use crate::fht::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorruptionSpec {
    /// Side of the blurred square in pixels; 0 disables the corruption.
    pub rect_side: usize,
    /// Standard deviation of the Gaussian kernel in pixels.
    pub sigma: f64,
}

impl CorruptionSpec {
    /// Square of side `rect_side` blurred with `σ = rect_side / 6`.
    pub fn for_side(rect_side: usize) -> CorruptionSpec {
        CorruptionSpec {
            rect_side,
            sigma: rect_side as f64 / 6.0,
        }
    }
}

/// Normalized Gaussian taps for offsets `-r..=r`, `r = ceil(3σ)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if !(sigma > 0.0) {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Half-sample symmetric reflection into `0..len`, repeated as often as needed.
fn reflect(i: i64, len: usize) -> usize {
    let period = 2 * len as i64;
    let m = i.rem_euclid(period);
    if m >= len as i64 {
        (period - 1 - m) as usize
    } else {
        m as usize
    }
}

fn rect_bounds(center: f64, side: usize, n: usize) -> (usize, usize) {
    let half = side as f64 / 2.0;
    let clip = |v: f64| v.clamp(0.0, n as f64) as usize;
    (clip((center - half).ceil()), clip((center + half).ceil()))
}

/// Blurs the pixels of a `rect_side` square centred on `vp` (clipped to the
/// image) with a separable Gaussian. The kernel reflects at the square's
/// border, so nothing outside leaks in and the total inside is preserved.
pub fn blur_corrupt(
    image: &GrayImage<f64>,
    vp: (f64, f64),
    spec: CorruptionSpec,
) -> GrayImage<f64> {
    let n = image.side();
    let (x0, x1) = rect_bounds(vp.0, spec.rect_side, n);
    let (y0, y1) = rect_bounds(vp.1, spec.rect_side, n);
    let mut out = image.clone();
    if x0 >= x1 || y0 >= y1 || !(spec.sigma > 0.0) {
        return out;
    }
    let (w, h) = (x1 - x0, y1 - y0);
    let kernel = gaussian_kernel(spec.sigma);
    let r = (kernel.len() / 2) as i64;
    let mut block: Vec<f64> = (y0..y1)
        .flat_map(|y| image.row(y)[x0..x1].to_vec())
        .collect();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, k)| k * block[y * w + reflect(x as i64 + j as i64 - r, w)])
                .sum();
        }
    }
    for y in 0..h {
        for x in 0..w {
            block[y * w + x] = kernel
                .iter()
                .enumerate()
                .map(|(j, k)| k * tmp[reflect(y as i64 + j as i64 - r, h) * w + x])
                .sum();
        }
    }
    for y in 0..h {
        for x in 0..w {
            out.set(y0 + y, x0 + x, block[y * w + x]);
        }
    }
    out
}

/// One point of an error-versus-square-size curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub grid: usize,
    pub k: usize,
    pub rect_side: usize,
    pub error: f64,
}

/// Top-1 and top-5 errors for every `(side, grid)` pair on blurred copies of
/// `samples`. Rows are ordered by side, then grid, then k.
pub fn corruption_sweep(
    predictor: &dyn VpPredictor,
    samples: &[Sample],
    sides: &[usize],
    grids: &[usize],
) -> Result<Vec<SweepRow>, VpError> {
    let n = samples.first().map(|s| s.image.side()).unwrap_or(1);
    let truths: Vec<(f64, f64)> = samples.iter().map(|s| s.vp).collect();
    let mut rows = Vec::new();
    for &side in sides {
        let spec = CorruptionSpec::for_side(side);
        let preds = samples
            .par_iter()
            .map(|s| predictor.rank(&blur_corrupt(&s.image, s.vp, spec)))
            .collect::<Result<Vec<_>, _>>()?;
        for &g in grids {
            let report = evaluate(&preds, &truths, n, g)?;
            for k in [1, 5] {
                rows.push(SweepRow {
                    grid: g,
                    k,
                    rect_side: side,
                    error: report.error(k),
                });
            }
        }
    }
    Ok(rows)
}
