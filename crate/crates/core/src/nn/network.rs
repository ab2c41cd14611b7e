use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::layers::{layer_backward, layer_forward, LayerCache};
use super::{LayerSpec, NetworkSpec, NnError, Shape, Tensor};

/// One trainable blob (a weight tensor or a bias vector).
#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Param {
    pub fn zeros(dims: Vec<usize>) -> Param {
        let len = dims.iter().product();
        Param {
            dims,
            data: vec![0.0; len],
        }
    }
}

/// A network description together with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    shapes: Vec<Shape>,
    params: Vec<Param>,
    /// `layer_params[i]` is the range of `params` owned by layer `i`.
    layer_params: Vec<std::ops::Range<usize>>,
}

/// Cached activations of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    pub caches: Vec<LayerCache>,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        &self
            .caches
            .last()
            .expect("network has at least one layer")
            .output
    }
}

impl Network {
    /// Fresh network: weights uniform in `±√(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Network, NnError> {
        let shapes = spec.shapes()?;
        if spec.layers.is_empty() {
            return Err(NnError::Config("network has no layers".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        let mut layer_params = Vec::new();
        for (layer, &shape) in spec.layers.iter().zip(&shapes) {
            let start = params.len();
            let dims = layer.param_dims(shape);
            if let Some(wdims) = dims.first() {
                let (fan_in, fan_out) = match layer {
                    LayerSpec::Conv { kernel, .. } => {
                        let k = kernel.0 * kernel.1;
                        (wdims[1] * k, wdims[0] * k)
                    }
                    _ => (wdims[1], wdims[0]),
                };
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut w = Param::zeros(wdims.clone());
                for v in &mut w.data {
                    *v = rng.gen_range(-limit..limit);
                }
                params.push(w);
                params.extend(dims[1..].iter().cloned().map(Param::zeros));
            }
            layer_params.push(start..params.len());
        }
        Ok(Network {
            spec,
            shapes,
            params,
            layer_params,
        })
    }

    /// Network with externally supplied parameters (e.g. loaded from disk).
    pub fn with_params(spec: NetworkSpec, params: Vec<Param>) -> Result<Network, NnError> {
        let mut net = Network::init(spec, 0)?;
        net.set_params(params)?;
        Ok(net)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn params(&self) -> &[Param] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Param] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: Vec<Param>) -> Result<(), NnError> {
        if params.len() != self.params.len()
            || params
                .iter()
                .zip(&self.params)
                .any(|(a, b)| a.dims != b.dims || a.data.len() != b.data.len())
        {
            return Err(NnError::Shape(
                "parameter blobs do not match the architecture".into(),
            ));
        }
        self.params = params;
        Ok(())
    }

    pub fn layer_params(&self, layer: usize) -> &[Param] {
        &self.params[self.layer_params[layer].clone()]
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Forward pass keeping every layer's input and output.
    pub fn forward(&self, input: &Tensor) -> Result<Trace, NnError> {
        if input.shape() != self.spec.input_shape {
            return Err(NnError::Shape(format!(
                "network expects input {}, got {}",
                self.spec.input_shape,
                input.shape()
            )));
        }
        let mut caches: Vec<LayerCache> = Vec::with_capacity(self.spec.layers.len());
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let x = caches.last().map_or(input, |c| &c.output);
            let y = layer_forward(layer, x, self.layer_params(i)).map_err(|e| e.in_layer(i))?;
            caches.push(LayerCache {
                input: x.clone(),
                output: y,
            });
        }
        Ok(Trace { caches })
    }

    /// Forward pass returning only the final output.
    pub fn predict(&self, input: &Tensor) -> Result<Tensor, NnError> {
        if input.shape() != self.spec.input_shape {
            return Err(NnError::Shape(format!(
                "network expects input {}, got {}",
                self.spec.input_shape,
                input.shape()
            )));
        }
        let mut x = input.clone();
        for (i, layer) in self.spec.layers.iter().enumerate() {
            x = layer_forward(layer, &x, self.layer_params(i)).map_err(|e| e.in_layer(i))?;
        }
        Ok(x)
    }

    /// Outputs of every layer, in order.
    pub fn intermediate(&self, input: &Tensor) -> Result<Vec<Tensor>, NnError> {
        Ok(self
            .forward(input)?
            .caches
            .into_iter()
            .map(|c| c.output)
            .collect())
    }

    /// Back-propagates `grad_output` through a trace. Returns one gradient per
    /// parameter blob and the gradient with respect to the network input.
    pub fn backward(
        &self,
        trace: &Trace,
        grad_output: &Tensor,
    ) -> Result<(Vec<Vec<f64>>, Tensor), NnError> {
        if trace.caches.len() != self.spec.layers.len() {
            return Err(NnError::MissingCache);
        }
        let mut grads: Vec<Vec<f64>> = vec![Vec::new(); self.params.len()];
        let mut g = grad_output.clone();
        for (i, layer) in self.spec.layers.iter().enumerate().rev() {
            let (gx, gp) = layer_backward(layer, self.layer_params(i), Some(&trace.caches[i]), &g)
                .map_err(|e| e.in_layer(i))?;
            for (slot, grad) in self.layer_params[i].clone().zip(gp) {
                grads[slot] = grad;
            }
            g = gx;
        }
        Ok((grads, g))
    }
}

/// Training signal for one sample.
#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    /// Index of the correct class, for softmax outputs.
    Class(usize),
    /// Desired output map, same shape as the network output.
    Heatmap(Tensor),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// `−ln p[target]` on a softmax output.
    SoftmaxCrossEntropy,
    /// `Σ (output − target)²` against a target map.
    HeatmapSse,
}

/// Loss value and its gradient with respect to the network output.
pub fn loss_and_grad(
    kind: LossKind,
    output: &Tensor,
    target: &Target,
) -> Result<(f64, Tensor), NnError> {
    match (kind, target) {
        (LossKind::SoftmaxCrossEntropy, Target::Class(k)) => {
            let p = output.data();
            if *k >= p.len() {
                return Err(NnError::Shape(format!(
                    "class {k} out of range for {} outputs",
                    p.len()
                )));
            }
            let pk = p[*k].max(1e-300);
            let mut g = Tensor::zeros(output.shape());
            g.data_mut()[*k] = -1.0 / pk;
            Ok((-pk.ln(), g))
        }
        (LossKind::HeatmapSse, Target::Heatmap(t)) => {
            if t.shape() != output.shape() {
                return Err(NnError::Shape(format!(
                    "target {} vs output {}",
                    t.shape(),
                    output.shape()
                )));
            }
            let diff: Vec<f64> = output
                .data()
                .iter()
                .zip(t.data())
                .map(|(o, t)| o - t)
                .collect();
            let loss = diff.iter().map(|d| d * d).sum();
            let grad =
                Tensor::from_vec(output.shape(), diff.into_iter().map(|d| 2.0 * d).collect())?;
            Ok((loss, grad))
        }
        _ => Err(NnError::Config(format!(
            "loss {kind:?} does not accept this target"
        ))),
    }
}

/// Gaussian bump of height 1 and width `sigma` (output pixels) centred on the
/// output-grid position of `vp`, for a single-channel output of `shape`.
pub fn heatmap_target(shape: Shape, map: &super::AffineMap, vp: (f64, f64), sigma: f64) -> Tensor {
    let (c, h, w) = match shape {
        Shape::Image { c, h, w } => (c, h, w),
        Shape::Flat(_) => panic!("heat-map target needs an image shape"),
    };
    let (cx, cy) = map.invert(vp);
    let mut t = Tensor::zeros(shape);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for ci in 0..c {
        let ch = t.channel_mut(ci);
        for y in 0..h {
            for x in 0..w {
                let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
                ch[y * w + x] = (-d2 * inv).exp();
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, AffineMap};

    fn tiny_spec() -> NetworkSpec {
        NetworkSpec {
            input_shape: Shape::image(1, 6, 6),
            layers: vec![
                LayerSpec::conv(2, 3, 1, 0),
                LayerSpec::Activation(Activation::Tanh),
                LayerSpec::Dense { outputs: 3 },
                LayerSpec::Softmax,
            ],
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = Network::init(tiny_spec(), 5).unwrap();
        let b = Network::init(tiny_spec(), 5).unwrap();
        let c = Network::init(tiny_spec(), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.params(), c.params());
        let limit = (6.0f64 / (9.0 + 18.0)).sqrt();
        assert!(a.params()[0].data.iter().all(|v| v.abs() < limit));
        assert!(a.params()[1].data.iter().all(|&v| v == 0.0));
        assert_eq!(a.param_count(), tiny_spec().param_count().unwrap());
    }

    #[test]
    fn predict_matches_trace_output() {
        let net = Network::init(tiny_spec(), 1).unwrap();
        let x = Tensor::from_vec(
            Shape::image(1, 6, 6),
            (0..36).map(|i| (i as f64 * 0.37).sin()).collect(),
        )
        .unwrap();
        let out = net.predict(&x).unwrap();
        assert_eq!(&out, net.forward(&x).unwrap().output());
        assert!((out.data().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(net.predict(&Tensor::zeros(Shape::image(1, 5, 5))).is_err());
    }

    #[test]
    fn cross_entropy_gradient_through_softmax() {
        let net = Network::init(tiny_spec(), 2).unwrap();
        let x = Tensor::from_vec(
            Shape::image(1, 6, 6),
            (0..36).map(|i| (i as f64).cos()).collect(),
        )
        .unwrap();
        let trace = net.forward(&x).unwrap();
        let (_, g) = loss_and_grad(
            LossKind::SoftmaxCrossEntropy,
            trace.output(),
            &Target::Class(1),
        )
        .unwrap();
        let cache = &trace.caches[3];
        let (gx, _) = crate::nn::layer_backward(&LayerSpec::Softmax, &[], Some(cache), &g).unwrap();
        // softmax + cross-entropy collapses to p − onehot
        for (i, (&gi, &pi)) in gx.data().iter().zip(trace.output().data()).enumerate() {
            let expected = pi - f64::from(i == 1);
            assert!((gi - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_target_mismatch() {
        let out = Tensor::zeros(Shape::Flat(3));
        assert!(loss_and_grad(LossKind::HeatmapSse, &out, &Target::Class(0)).is_err());
        assert!(loss_and_grad(LossKind::SoftmaxCrossEntropy, &out, &Target::Class(3)).is_err());
    }

    #[test]
    fn heatmap_peaks_at_mapped_point() {
        let map = AffineMap {
            scale_x: 2.0,
            offset_x: 4.0,
            scale_y: 2.0,
            offset_y: 4.0,
        };
        let t = heatmap_target(Shape::image(1, 10, 10), &map, (10.0, 16.0), 2.0);
        // (10, 16) → output (3, 6)
        assert_eq!(t.channel(0)[6 * 10 + 3], 1.0);
        assert!(t.data().iter().all(|&v| v <= 1.0));
    }
}
