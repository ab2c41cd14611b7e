//! Non-learning baseline: accumulate lines with the FHT, back-project with
//! its transpose, and take the brightest pixel.

use crate::fht::{fht_quadrant, GrayImage, Quadrant};

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalVp {
    /// `(x, y)` of the brightest back-projected pixel.
    pub point: (f64, f64),
    /// Set when the response has no unique structure (e.g. a blank image).
    pub low_confidence: bool,
    pub response: GrayImage<f64>,
}

/// Central-difference gradient magnitude (edges replicated), with everything
/// below the 90th percentile set to zero.
pub fn edge_prefilter(image: &GrayImage<f64>) -> GrayImage<f64> {
    let n = image.side();
    let at = |y: usize, x: usize| image.get(y, x);
    let mag = GrayImage::from_fn(image.p(), |y, x| {
        let gx = (at(y, (x + 1).min(n - 1)) - at(y, x.saturating_sub(1))) / 2.0;
        let gy = (at((y + 1).min(n - 1), x) - at(y.saturating_sub(1), x)) / 2.0;
        gx.hypot(gy)
    });
    let mut sorted = mag.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    let threshold = sorted[(sorted.len() * 9 / 10).min(sorted.len() - 1)];
    mag.map(|v| if v >= threshold { v } else { 0.0 })
}

/// Sum over `quadrants` of the back-projected Hough image.
pub fn back_projection(image: &GrayImage<f64>, quadrants: &[Quadrant]) -> GrayImage<f64> {
    let mut total = GrayImage::zeros(image.p());
    for &q in quadrants {
        let r = fht_quadrant(&fht_quadrant(image, q, false), q, true);
        total = total.axpby(1.0, &r, 1.0);
    }
    total
}

/// Vanishing point estimate for a square power-of-two image using the
/// mostly-horizontal, downward line family.
pub fn classical_vp(image: &GrayImage<f64>, prefilter: bool) -> ClassicalVp {
    classical_vp_with(image, prefilter, &[Quadrant::HorizontalDown])
}

/// [`classical_vp`] over an explicit set of line families.
pub fn classical_vp_with(
    image: &GrayImage<f64>,
    prefilter: bool,
    quadrants: &[Quadrant],
) -> ClassicalVp {
    let source = if prefilter {
        edge_prefilter(image)
    } else {
        image.clone()
    };
    let response = back_projection(&source, quadrants);
    let (y, x, best) = response.argmax();
    let first = response.data()[0];
    let low_confidence = !(best > 0.0) || response.data().iter().all(|&v| v == first);
    ClassicalVp {
        point: (x as f64, y as f64),
        low_confidence,
        response,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fht::pattern;
    use crate::fht::PatternId;

    #[test]
    fn blank_image_is_low_confidence() {
        let r = classical_vp(&GrayImage::zeros(4), true);
        assert_eq!(r.point, (0.0, 0.0));
        assert!(r.low_confidence);
    }

    #[test]
    fn single_pattern_lights_its_own_pixels() {
        let id = PatternId::new(5, 9, 5).unwrap();
        let pixels = pattern(id, 5).unwrap();
        let mut img = GrayImage::zeros(5);
        for &(x, y) in &pixels {
            img.set(y, x, 1.0);
        }
        let r = classical_vp(&img, false);
        assert!(!r.low_confidence);
        let (x, y) = (r.point.0 as usize, r.point.1 as usize);
        assert!(pixels.contains(&(x, y)), "{:?} not on the line", r.point);
    }
}
