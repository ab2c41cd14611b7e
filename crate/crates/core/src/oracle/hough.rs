use std::f64::consts::PI;

use super::OracleError;
use crate::fht::GrayImage;

/// Accumulator of the classical `(s, α)` Hough transform.
///
/// Lines are `x·cos α + y·sin α = s` in coordinates centred on the image
/// centre, with `y` growing downwards. `α` is sampled uniformly over `[0, π)`
/// and `s` uniformly over `[−n√2/2, n√2/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HoughAccumulator {
    pub side: usize,
    pub s_samples: usize,
    pub alpha_samples: usize,
    /// Row-major `[alpha index][s index]`.
    pub values: Vec<f64>,
}

impl HoughAccumulator {
    pub fn s_value(&self, i: usize) -> f64 {
        s_grid_value(self.side, self.s_samples, i)
    }

    pub fn alpha_value(&self, j: usize) -> f64 {
        j as f64 * PI / self.alpha_samples as f64
    }

    pub fn get(&self, alpha_index: usize, s_index: usize) -> f64 {
        self.values[alpha_index * self.s_samples + s_index]
    }

    /// `(alpha index, s index, value)` of the largest bin; ties go to the first.
    pub fn argmax(&self) -> (usize, usize, f64) {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        (
            best / self.s_samples,
            best % self.s_samples,
            self.values[best],
        )
    }

    /// Nearest grid bin `(alpha index, s index)` to a continuous line.
    /// `alpha` is reduced into `[0, π)` first, flipping the sign of `s` as needed.
    pub fn nearest_bin(&self, s: f64, alpha: f64) -> (usize, usize) {
        let (mut s, mut alpha) = (s, alpha.rem_euclid(2.0 * PI));
        if alpha >= PI {
            alpha -= PI;
            s = -s;
        }
        let j = ((alpha / PI * self.alpha_samples as f64).round() as usize) % self.alpha_samples;
        let s_max = self.side as f64 * std::f64::consts::SQRT_2 / 2.0;
        let i = if self.s_samples == 1 {
            0
        } else {
            let step = 2.0 * s_max / (self.s_samples - 1) as f64;
            (((s + s_max) / step).round().max(0.0) as usize).min(self.s_samples - 1)
        };
        (j, i)
    }
}

fn s_grid_value(side: usize, s_samples: usize, i: usize) -> f64 {
    if s_samples == 1 {
        return 0.0;
    }
    let s_max = side as f64 * std::f64::consts::SQRT_2 / 2.0;
    -s_max + 2.0 * s_max * i as f64 / (s_samples - 1) as f64
}

/// Pixels `(x, y)` of the nearest-pixel rasterization of `x·cos α + y·sin α = s`
/// (centred coordinates) inside an `n × n` image. One pixel per column for
/// mostly horizontal lines, one per row otherwise.
pub fn rasterize_line(side: usize, s: f64, alpha: f64) -> Vec<(usize, usize)> {
    let c = (side as f64 - 1.0) / 2.0;
    let (sin, cos) = alpha.sin_cos();
    let mut pixels = Vec::with_capacity(side);
    if sin.abs() >= cos.abs() {
        for x in 0..side {
            let xc = x as f64 - c;
            let y = ((s - xc * cos) / sin + c).round();
            if y >= 0.0 && y < side as f64 {
                pixels.push((x, y as usize));
            }
        }
    } else {
        for y in 0..side {
            let yc = y as f64 - c;
            let x = ((s - yc * sin) / cos + c).round();
            if x >= 0.0 && x < side as f64 {
                pixels.push((x as usize, y));
            }
        }
    }
    pixels
}

/// Brute-force `O(n·S·A)` Hough accumulator, for reference use only.
pub fn classical_hough(
    image: &GrayImage<f64>,
    s_samples: usize,
    alpha_samples: usize,
) -> Result<HoughAccumulator, OracleError> {
    if s_samples == 0 || alpha_samples == 0 {
        return Err(OracleError::InvalidArgument(
            "sample counts must be positive".into(),
        ));
    }
    let n = image.side();
    let mut acc = HoughAccumulator {
        side: n,
        s_samples,
        alpha_samples,
        values: vec![0.0; s_samples * alpha_samples],
    };
    for j in 0..alpha_samples {
        let alpha = acc.alpha_value(j);
        for i in 0..s_samples {
            let s = acc.s_value(i);
            acc.values[j * s_samples + i] = rasterize_line(n, s, alpha)
                .into_iter()
                .map(|(x, y)| image.get(y, x))
                .sum();
        }
    }
    Ok(acc)
}
