use crate::fht::{log2_exact, Quadrant};

use super::{NnError, Shape};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Tanh,
    Relu,
    /// `rf[a, b](x) = s / (b + |s|)` with the signed power `s = sign(x)·|x|^a`.
    Rf {
        a: u32,
        b: f64,
    },
}

impl std::fmt::Display for Activation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Activation::Tanh => write!(f, "tanh"),
            Activation::Relu => write!(f, "relu"),
            Activation::Rf { a, b } => write!(f, "rf[{a},{b}]"),
        }
    }
}

/// Constant factor applied to a Hough layer's sums.
///
/// Raw line sums grow with the side `n`; two such layers in a row multiply
/// activations and gradients by about `n²`, which drives the saturating
/// activations around them flat. Dividing each layer by `√n` keeps the pair
/// near unit gain. The factor is linear, so the backward pass is scaled the
/// same way and stays the exact adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HoughGain {
    /// Plain sums.
    Sum,
    /// Sums divided by `√n`.
    InvSqrtSide,
    /// Sums divided by `n` (means along each line).
    InvSide,
}

impl HoughGain {
    pub fn factor(self, side: usize) -> f64 {
        match self {
            HoughGain::Sum => 1.0,
            HoughGain::InvSqrtSide => 1.0 / (side as f64).sqrt(),
            HoughGain::InvSide => 1.0 / side as f64,
        }
    }
}

/// One layer of a network description.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    /// Cross-correlation with per-filter bias; `padding` adds zeros on every side.
    Conv {
        filters: usize,
        kernel: (usize, usize),
        stride: (usize, usize),
        padding: (usize, usize),
    },
    /// Zero frame of `margin` rows/columns on each side.
    Pad {
        margin: (usize, usize),
    },
    Activation(Activation),
    /// Per-channel Fast Hough Transform (or its transpose) for each listed quadrant.
    ///
    /// The forward layer maps `C` channels to `Q·C`, quadrant-major. The
    /// transposed layer keeps the channel count and applies the adjoint of
    /// quadrant `q` to the `q`-th group of `C / Q` channels, undoing the layout
    /// of a forward layer with the same quadrant list. Neither has parameters.
    Fht {
        transposed: bool,
        quadrants: Vec<Quadrant>,
        gain: HoughGain,
    },
    Dense {
        outputs: usize,
    },
    Softmax,
}

impl LayerSpec {
    pub fn conv(filters: usize, kernel: usize, stride: usize, padding: usize) -> LayerSpec {
        LayerSpec::Conv {
            filters,
            kernel: (kernel, kernel),
            stride: (stride, stride),
            padding: (padding, padding),
        }
    }

    pub fn pad(margin: usize) -> LayerSpec {
        LayerSpec::Pad {
            margin: (margin, margin),
        }
    }

    /// Forward Hough layer with [`HoughGain::InvSqrtSide`].
    pub fn fht(quadrants: &[Quadrant]) -> LayerSpec {
        LayerSpec::Fht {
            transposed: false,
            quadrants: quadrants.to_vec(),
            gain: HoughGain::InvSqrtSide,
        }
    }

    /// Transposed Hough layer with [`HoughGain::InvSqrtSide`].
    pub fn fht_transposed(quadrants: &[Quadrant]) -> LayerSpec {
        LayerSpec::Fht {
            transposed: true,
            quadrants: quadrants.to_vec(),
            gain: HoughGain::InvSqrtSide,
        }
    }

    /// The same layer with another Hough gain; other layers are returned unchanged.
    pub fn with_gain(self, gain: HoughGain) -> LayerSpec {
        match self {
            LayerSpec::Fht {
                transposed,
                quadrants,
                ..
            } => LayerSpec::Fht {
                transposed,
                quadrants,
                gain,
            },
            other => other,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv { .. } => "conv",
            LayerSpec::Pad { .. } => "pad",
            LayerSpec::Activation(_) => "activation",
            LayerSpec::Fht {
                transposed: false, ..
            } => "fht",
            LayerSpec::Fht {
                transposed: true, ..
            } => "fht-transposed",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Softmax => "softmax",
        }
    }

    /// Shape produced from `input`, or a structural error.
    pub fn output_shape(&self, input: Shape) -> Result<Shape, NnError> {
        let image = |what: &str| match input {
            Shape::Image { c, h, w } => Ok((c, h, w)),
            Shape::Flat(_) => Err(NnError::Shape(format!(
                "{what} needs an image input, got {input}"
            ))),
        };
        match self {
            LayerSpec::Conv {
                filters,
                kernel,
                stride,
                padding,
            } => {
                let (_, h, w) = image("conv")?;
                if *filters == 0 || kernel.0 == 0 || kernel.1 == 0 || stride.0 == 0 || stride.1 == 0
                {
                    return Err(NnError::Config("conv dimensions must be positive".into()));
                }
                let (hp, wp) = (h + 2 * padding.0, w + 2 * padding.1);
                if hp < kernel.0 || wp < kernel.1 {
                    return Err(NnError::Shape(format!(
                        "kernel {}x{} larger than padded input {hp}x{wp}",
                        kernel.0, kernel.1
                    )));
                }
                Ok(Shape::image(
                    *filters,
                    (hp - kernel.0) / stride.0 + 1,
                    (wp - kernel.1) / stride.1 + 1,
                ))
            }
            LayerSpec::Pad { margin } => {
                let (c, h, w) = image("pad")?;
                Ok(Shape::image(c, h + 2 * margin.0, w + 2 * margin.1))
            }
            LayerSpec::Activation(act) => {
                if let Activation::Rf { a, b } = act {
                    if *a == 0 || !(*b > 0.0) {
                        return Err(NnError::Config(format!(
                            "invalid {act}: need a >= 1, b > 0"
                        )));
                    }
                }
                Ok(input)
            }
            LayerSpec::Fht {
                transposed,
                quadrants,
                ..
            } => {
                let (c, h, w) = image("fht")?;
                if h != w || log2_exact(h).is_none() {
                    return Err(NnError::Shape(format!(
                        "fht needs a square power-of-two input, got {h}x{w}"
                    )));
                }
                if quadrants.is_empty() {
                    return Err(NnError::Config(
                        "fht layer needs at least one quadrant".into(),
                    ));
                }
                if *transposed {
                    if c % quadrants.len() != 0 {
                        return Err(NnError::Shape(format!(
                            "{c} channels do not split into {} quadrant groups",
                            quadrants.len()
                        )));
                    }
                    Ok(input)
                } else {
                    Ok(Shape::image(c * quadrants.len(), h, w))
                }
            }
            LayerSpec::Dense { outputs } => {
                if *outputs == 0 {
                    return Err(NnError::Config("dense layer needs outputs".into()));
                }
                Ok(Shape::Flat(*outputs))
            }
            LayerSpec::Softmax => match input {
                Shape::Flat(_) => Ok(input),
                _ => Err(NnError::Shape("softmax needs a flat input".into())),
            },
        }
    }

    /// Dimensions of each trainable blob: weights then bias.
    pub fn param_dims(&self, input: Shape) -> Vec<Vec<usize>> {
        match (self, input) {
            (
                LayerSpec::Conv {
                    filters, kernel, ..
                },
                Shape::Image { c, .. },
            ) => {
                vec![vec![*filters, c, kernel.0, kernel.1], vec![*filters]]
            }
            (LayerSpec::Dense { outputs }, _) => vec![vec![*outputs, input.len()], vec![*outputs]],
            _ => Vec::new(),
        }
    }
}

/// Input shape plus an ordered list of layers.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkSpec {
    pub input_shape: Shape,
    pub layers: Vec<LayerSpec>,
}

impl NetworkSpec {
    /// Shapes before and after every layer (`layers.len() + 1` entries).
    pub fn shapes(&self) -> Result<Vec<Shape>, NnError> {
        let mut shapes = vec![self.input_shape];
        for (i, layer) in self.layers.iter().enumerate() {
            let next = layer
                .output_shape(*shapes.last().unwrap())
                .map_err(|e| e.in_layer(i))?;
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn output_shape(&self) -> Result<Shape, NnError> {
        Ok(*self.shapes()?.last().unwrap())
    }

    /// Number of trainable coefficients.
    pub fn param_count(&self) -> Result<usize, NnError> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .zip(&shapes)
            .flat_map(|(l, &s)| l.param_dims(s))
            .map(|d| d.iter().product::<usize>())
            .sum())
    }

    /// Trainable coefficients contributed by each layer.
    pub fn param_counts_per_layer(&self) -> Result<Vec<usize>, NnError> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .zip(&shapes)
            .map(|(l, &s)| {
                l.param_dims(s)
                    .iter()
                    .map(|d| d.iter().product::<usize>())
                    .sum()
            })
            .collect())
    }

    /// Affine map from output pixel coordinates back to input pixel coordinates.
    ///
    /// Hough layers are treated as coordinate identities: a forward layer and
    /// the transposed layer that follows it bring the data back onto the grid
    /// the forward layer received, provided the Hough-space convolutions are
    /// compensated by an equal zero frame.
    pub fn spatial_map(&self) -> Result<AffineMap, NnError> {
        let mut map = AffineMap::IDENTITY;
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let (ay, by, ax, bx) = match layer {
                LayerSpec::Conv {
                    kernel,
                    stride,
                    padding,
                    ..
                } => (
                    stride.0 as f64,
                    (kernel.0 as f64 - 1.0) / 2.0 - padding.0 as f64,
                    stride.1 as f64,
                    (kernel.1 as f64 - 1.0) / 2.0 - padding.1 as f64,
                ),
                LayerSpec::Pad { margin } => (1.0, -(margin.0 as f64), 1.0, -(margin.1 as f64)),
                LayerSpec::Activation(_) | LayerSpec::Fht { .. } => (1.0, 0.0, 1.0, 0.0),
                LayerSpec::Dense { .. } | LayerSpec::Softmax => {
                    return Err(NnError::Shape(format!(
                        "layer {i} ({}) is not spatial",
                        layer.kind()
                    )))
                }
            };
            map = AffineMap {
                scale_x: ax * map.scale_x,
                offset_x: ax * map.offset_x + bx,
                scale_y: ay * map.scale_y,
                offset_y: ay * map.offset_y + by,
            };
        }
        Ok(map)
    }
}

/// Per-axis affine map `input = scale · output + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub scale_x: f64,
    pub offset_x: f64,
    pub scale_y: f64,
    pub offset_y: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale_x: 1.0,
        offset_x: 0.0,
        scale_y: 1.0,
        offset_y: 0.0,
    };

    /// Maps an output point `(x, y)` to input coordinates.
    pub fn apply(&self, point: (f64, f64)) -> (f64, f64) {
        (
            self.scale_x * point.0 + self.offset_x,
            self.scale_y * point.1 + self.offset_y,
        )
    }

    pub fn is_invertible(&self) -> bool {
        self.scale_x != 0.0 && self.scale_y != 0.0
    }

    /// Maps an input point back to output coordinates.
    pub fn invert(&self, point: (f64, f64)) -> (f64, f64) {
        (
            (point.0 - self.offset_x) / self.scale_x,
            (point.1 - self.offset_y) / self.scale_y,
        )
    }
}

/// Classification baseline: four ReLU convolutions, a dense layer with one
/// output per grid cell, and softmax.
pub fn build_base_arch(grid: usize, input_shape: Shape) -> Result<NetworkSpec, NnError> {
    if grid == 0 {
        return Err(NnError::Config("grid must be positive".into()));
    }
    let relu = || LayerSpec::Activation(Activation::Relu);
    let spec = NetworkSpec {
        input_shape,
        layers: vec![
            LayerSpec::conv(32, 11, 4, 0),
            relu(),
            LayerSpec::conv(32, 5, 1, 2),
            relu(),
            LayerSpec::conv(32, 3, 1, 1),
            relu(),
            LayerSpec::conv(32, 3, 1, 1),
            relu(),
            LayerSpec::Dense {
                outputs: grid * grid,
            },
            LayerSpec::Softmax,
        ],
    };
    spec.shapes()?;
    Ok(spec)
}

/// Sizes of a desk-scale FHT network.
#[derive(Clone, Debug, PartialEq)]
pub struct ToyArch {
    pub input_side: usize,
    pub input_channels: usize,
    /// Filters per convolution outside Hough space.
    pub channels: usize,
    /// Quadrants concatenated by the Hough layers.
    pub quadrants: Vec<Quadrant>,
    /// Stride of the second convolution. 2 halves the Hough grid; 1 keeps
    /// full resolution at roughly four times the cost.
    pub stride: usize,
}

impl Default for ToyArch {
    fn default() -> Self {
        ToyArch {
            input_side: 64,
            input_channels: 1,
            channels: 4,
            quadrants: vec![Quadrant::HorizontalDown],
            stride: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArchScale {
    Toy(ToyArch),
    /// The full-size FHT network on a 378×378 grayscale input, the smallest
    /// size near the original frames at which both Hough layers see a
    /// power-of-two side.
    Paper,
}

/// Input side used for the full-size layer list.
pub const PAPER_INPUT_SIDE: usize = 378;
/// Published trainable coefficient count of the full-size network. Reported
/// for comparison only.
pub const PAPER_PARAM_COUNT: usize = 25309;

const RF31: Activation = Activation::Rf { a: 3, b: 1.0 };
const RF21: Activation = Activation::Rf { a: 2, b: 1.0 };

fn conv_act(layers: &mut Vec<LayerSpec>, conv: LayerSpec, act: Activation) {
    layers.push(conv);
    layers.push(LayerSpec::Activation(act));
}

/// Conv block, Hough transform, Hough-space conv block, transposed transform,
/// image-space conv block ending in `rf[2,1]`.
pub fn build_fht_arch(scale: &ArchScale) -> Result<NetworkSpec, NnError> {
    use Activation::Tanh;
    match scale {
        ArchScale::Paper => {
            let q = [Quadrant::HorizontalDown];
            let mut layers = Vec::new();
            conv_act(&mut layers, LayerSpec::conv(12, 5, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(12, 5, 3, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(12, 3, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(12, 3, 1, 0), Tanh);
            layers.push(LayerSpec::pad(4));
            conv_act(&mut layers, LayerSpec::fht(&q), RF31);
            for _ in 0..3 {
                conv_act(&mut layers, LayerSpec::conv(12, 5, 1, 0), Tanh);
            }
            layers.push(LayerSpec::pad(6));
            conv_act(&mut layers, LayerSpec::fht_transposed(&q), RF31);
            conv_act(&mut layers, LayerSpec::conv(12, 5, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(12, 5, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(12, 5, 1, 0), RF21);
            let spec = NetworkSpec {
                input_shape: Shape::image(1, PAPER_INPUT_SIDE, PAPER_INPUT_SIDE),
                layers,
            };
            spec.shapes()?;
            Ok(spec)
        }
        ArchScale::Toy(toy) => {
            let (c, q) = (toy.channels, toy.quadrants.as_slice());
            if c == 0 || toy.input_channels == 0 || q.is_empty() || toy.stride == 0 {
                return Err(NnError::Config(
                    "toy architecture needs channels and quadrants".into(),
                ));
            }
            let mut layers = Vec::new();
            conv_act(&mut layers, LayerSpec::conv(c, 5, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(c, 5, toy.stride, 0), Tanh);
            let head = NetworkSpec {
                input_shape: Shape::image(toy.input_channels, toy.input_side, toy.input_side),
                layers: layers.clone(),
            };
            let side = match head.output_shape() {
                Ok(Shape::Image { h, .. }) => h,
                _ => {
                    return Err(NnError::Config(format!(
                        "input side {} is too small",
                        toy.input_side
                    )))
                }
            };
            let target = side.next_power_of_two();
            if (target - side) % 2 != 0 {
                return Err(NnError::Config(format!(
                    "cannot pad {side}x{side} symmetrically to a power of two; pick another input side"
                )));
            }
            layers.push(LayerSpec::pad((target - side) / 2));
            conv_act(&mut layers, LayerSpec::fht(q), RF31);
            conv_act(&mut layers, LayerSpec::conv(c * q.len(), 3, 1, 0), Tanh);
            conv_act(&mut layers, LayerSpec::conv(c * q.len(), 3, 1, 0), Tanh);
            layers.push(LayerSpec::pad(2));
            conv_act(&mut layers, LayerSpec::fht_transposed(q), RF31);
            conv_act(&mut layers, LayerSpec::conv(c, 3, 1, 0), Tanh);
            // An even kernel shifts the output grid by half a pixel, so output
            // samples land on odd input coordinates and grid-cell boundaries
            // at multiples of two fall between them.
            conv_act(&mut layers, LayerSpec::conv(1, 4, 1, 0), RF21);
            let spec = NetworkSpec {
                input_shape: head.input_shape,
                layers,
            };
            spec.shapes()?;
            Ok(spec)
        }
    }
}

/// The toy FHT network with its Hough layers replaced by local operations:
/// the forward transform becomes a learned 1×1 convolution producing the same
/// channel count, and the transposed transform is dropped. Shapes, padding and
/// activations are otherwise unchanged, so the output grid and the parameter
/// budget stay comparable.
pub fn build_conv_only_arch(toy: &ToyArch) -> Result<NetworkSpec, NnError> {
    let fht = build_fht_arch(&ArchScale::Toy(toy.clone()))?;
    let mut layers = Vec::with_capacity(fht.layers.len());
    for layer in fht.layers {
        match layer {
            LayerSpec::Fht {
                transposed: false,
                quadrants,
                ..
            } => {
                layers.push(LayerSpec::conv(toy.channels * quadrants.len(), 1, 1, 0));
            }
            LayerSpec::Fht {
                transposed: true, ..
            } => layers.push(LayerSpec::Activation(Activation::Tanh)),
            other => layers.push(other),
        }
    }
    // collapse the placeholder tanh into the rf that already follows it
    let mut cleaned: Vec<LayerSpec> = Vec::with_capacity(layers.len());
    for layer in layers {
        if let (Some(LayerSpec::Activation(Activation::Tanh)), LayerSpec::Activation(_)) =
            (cleaned.last(), &layer)
        {
            cleaned.pop();
        }
        cleaned.push(layer);
    }
    let spec = NetworkSpec {
        input_shape: fht.input_shape,
        layers: cleaned,
    };
    spec.shapes()?;
    Ok(spec)
}
