//! Uniform interface over the trained network and the classical baseline.

use rayon::prelude::*;

use super::{classical_vp_with, rank_pixels, Sample, VpError};
use crate::fht::{GrayImage, Quadrant};
use crate::nn::{
    heatmap_target, AffineMap, Network, NetworkSpec, Shape, Target, Tensor, TrainSample,
};

/// Width, in output pixels, of the Gaussian bump used as the training target.
pub const HEATMAP_SIGMA: f64 = 2.0;

/// Something that ranks candidate vanishing points for an image.
pub trait VpPredictor: Sync {
    /// Candidate `(x, y)` points, most likely first. Long enough to yield
    /// several distinct grid cells.
    fn rank(&self, image: &GrayImage<f64>) -> Result<Vec<(f64, f64)>, VpError>;
}

/// Single-channel tensor holding `image`.
pub fn image_tensor(image: &GrayImage<f64>) -> Tensor {
    let n = image.side();
    Tensor::from_vec(Shape::image(1, n, n), image.data().to_vec()).expect("square image")
}

fn ranked_points(map: &Tensor, affine: &AffineMap) -> Vec<(f64, f64)> {
    let (_, _, w) = map.chw();
    rank_pixels(map)
        .into_iter()
        .map(|i| affine.apply(((i % w) as f64, (i / w) as f64)))
        .collect()
}

/// A network whose first output channel is a vanishing-point heat map.
pub struct NetworkPredictor {
    pub network: Network,
    pub map: AffineMap,
}

impl NetworkPredictor {
    pub fn new(network: Network) -> Result<NetworkPredictor, VpError> {
        let map = network.spec().spatial_map()?;
        Ok(NetworkPredictor { network, map })
    }
}

impl VpPredictor for NetworkPredictor {
    fn rank(&self, image: &GrayImage<f64>) -> Result<Vec<(f64, f64)>, VpError> {
        let out = self.network.predict(&image_tensor(image))?;
        Ok(ranked_points(&out, &self.map))
    }
}

/// The back-projection baseline, ranked by response.
pub struct ClassicalPredictor {
    pub prefilter: bool,
    pub quadrants: Vec<Quadrant>,
}

impl Default for ClassicalPredictor {
    fn default() -> Self {
        ClassicalPredictor {
            prefilter: false,
            quadrants: Quadrant::ALL.to_vec(),
        }
    }
}

impl VpPredictor for ClassicalPredictor {
    fn rank(&self, image: &GrayImage<f64>) -> Result<Vec<(f64, f64)>, VpError> {
        let r = classical_vp_with(image, self.prefilter, &self.quadrants);
        Ok(ranked_points(
            &image_tensor(&r.response),
            &AffineMap::IDENTITY,
        ))
    }
}

/// Training pairs for a heat-map network: the image and a Gaussian bump at
/// the annotated point on the network's output grid.
pub fn heatmap_samples(
    spec: &NetworkSpec,
    samples: &[Sample],
    sigma: f64,
) -> Result<Vec<TrainSample>, VpError> {
    let shape = spec.output_shape()?;
    let map = spec.spatial_map()?;
    Ok(samples
        .par_iter()
        .map(|s| TrainSample {
            input: image_tensor(&s.image),
            target: Target::Heatmap(heatmap_target(shape, &map, s.vp, sigma)),
        })
        .collect())
}
