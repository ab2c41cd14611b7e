//! Operation counts per layer.
//!
//! A convolution with `m` filters of size `f × f` on a `c × s × s` input costs
//! about `c·s²·f²·m` multiply-adds; a Hough layer costs exactly `c·s²·log2(s)`
//! additions per quadrant. Their ratio, `f²·m / log2(s)` when `c` and `s`
//! agree, is why the Hough layers are cheap next to the convolutions around them.

use super::{LayerSpec, NetworkSpec, NnError, Shape};

#[derive(Clone, Debug, PartialEq)]
pub struct LayerOps {
    pub index: usize,
    pub kind: &'static str,
    pub ops: u64,
}

/// Cost ratio between a Hough layer and a neighbouring convolution.
#[derive(Clone, Debug, PartialEq)]
pub struct PairRatio {
    pub conv_index: usize,
    pub fht_index: usize,
    /// `conv ops / fht ops`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityReport {
    pub layers: Vec<LayerOps>,
    pub ratios: Vec<PairRatio>,
}

impl ComplexityReport {
    pub fn total(&self) -> u64 {
        self.layers.iter().map(|l| l.ops).sum()
    }
}

pub fn complexity_report(spec: &NetworkSpec) -> Result<ComplexityReport, NnError> {
    let shapes = spec.shapes()?;
    let mut layers = Vec::with_capacity(spec.layers.len());
    for (index, (layer, &input)) in spec.layers.iter().zip(&shapes).enumerate() {
        let ops = match (layer, input) {
            (
                LayerSpec::Conv {
                    filters, kernel, ..
                },
                Shape::Image { c, h, w },
            ) => (c * h * w * kernel.0 * kernel.1 * filters) as u64,
            (
                LayerSpec::Fht {
                    transposed,
                    quadrants,
                    ..
                },
                Shape::Image { c, h, w },
            ) => {
                let per_channel = (h * w) as u64 * u64::from(h.trailing_zeros());
                // the transposed layer splits its channels between quadrants
                let channels = if *transposed { c } else { c * quadrants.len() };
                channels as u64 * per_channel
            }
            (LayerSpec::Dense { outputs }, _) => (input.len() * outputs) as u64,
            _ => 0,
        };
        layers.push(LayerOps {
            index,
            kind: layer.kind(),
            ops,
        });
    }

    let is_conv = |i: usize| matches!(spec.layers[i], LayerSpec::Conv { .. });
    let passthrough = |i: usize| {
        matches!(
            spec.layers[i],
            LayerSpec::Pad { .. } | LayerSpec::Activation(_)
        )
    };
    let mut ratios = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        if !matches!(layer, LayerSpec::Fht { .. }) || layers[i].ops == 0 {
            continue;
        }
        let before = (0..i)
            .rev()
            .take_while(|&j| is_conv(j) || passthrough(j))
            .find(|&j| is_conv(j));
        let after = (i + 1..spec.layers.len())
            .take_while(|&j| is_conv(j) || passthrough(j))
            .find(|&j| is_conv(j));
        for j in before.into_iter().chain(after) {
            ratios.push(PairRatio {
                conv_index: j,
                fht_index: i,
                ratio: layers[j].ops as f64 / layers[i].ops as f64,
            });
        }
    }
    Ok(ComplexityReport { layers, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fht::Quadrant;

    #[test]
    fn formula_instances() {
        let spec = NetworkSpec {
            input_shape: Shape::image(12, 32, 32),
            layers: vec![
                LayerSpec::fht(&[Quadrant::HorizontalDown]),
                LayerSpec::conv(12, 5, 1, 2),
            ],
        };
        let report = complexity_report(&spec).unwrap();
        assert_eq!(report.layers[0].ops, 12 * 1024 * 5);
        assert_eq!(report.layers[0].ops, 61440);
        assert_eq!(report.layers[1].ops, 12 * 1024 * 25 * 12);
        assert_eq!(report.ratios.len(), 1);
        assert_eq!(report.ratios[0].ratio, 60.0);
    }

    #[test]
    fn pads_and_activations_do_not_break_pairs() {
        let spec = crate::nn::build_fht_arch(&crate::nn::ArchScale::Paper).unwrap();
        let report = complexity_report(&spec).unwrap();
        // each Hough layer has a convolution on both sides
        assert_eq!(report.ratios.len(), 4);
        assert!(report.ratios.iter().all(|r| r.ratio > 1.0));
    }
}
