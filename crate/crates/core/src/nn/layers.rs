use crate::fht::{fht_quadrant, GrayImage, Quadrant};

use super::{Activation, HoughGain, LayerSpec, NnError, Param, Shape, Tensor};

/// `rf[a, b](x) = s / (b + |s|)` with `s = sign(x)·|x|^a`.
///
/// Odd, strictly increasing, bounded by 1 in magnitude, with an inflection at
/// zero for every `a ≥ 1`.
pub fn rf_activation(x: f64, a: u32, b: f64) -> f64 {
    let m = x.abs().powi(a as i32);
    x.signum() * m / (b + m)
}

/// Derivative of [`rf_activation`]: `a·|x|^(a−1)·b / (b + |x|^a)²`.
pub fn rf_derivative(x: f64, a: u32, b: f64) -> f64 {
    let ax = x.abs();
    let m = ax.powi(a as i32);
    let d = b + m;
    a as f64 * ax.powi(a as i32 - 1) * b / (d * d)
}

fn activate(act: Activation, x: f64) -> f64 {
    match act {
        Activation::Tanh => x.tanh(),
        Activation::Relu => x.max(0.0),
        Activation::Rf { a, b } => rf_activation(x, a, b),
    }
}

/// What the backward pass needs from the forward pass of one layer.
#[derive(Clone, Debug)]
pub struct LayerCache {
    pub input: Tensor,
    pub output: Tensor,
}

fn padded(input: &Tensor, ph: usize, pw: usize) -> Tensor {
    let (c, h, w) = input.chw();
    if ph == 0 && pw == 0 {
        return input.clone();
    }
    let (hp, wp) = (h + 2 * ph, w + 2 * pw);
    let mut out = Tensor::zeros(Shape::image(c, hp, wp));
    for ci in 0..c {
        let src = input.channel(ci);
        let dst = out.channel_mut(ci);
        for y in 0..h {
            dst[(y + ph) * wp + pw..(y + ph) * wp + pw + w]
                .copy_from_slice(&src[y * w..(y + 1) * w]);
        }
    }
    out
}

fn cropped(input: &Tensor, ph: usize, pw: usize) -> Tensor {
    let (c, hp, wp) = input.chw();
    if ph == 0 && pw == 0 {
        return input.clone();
    }
    let (h, w) = (hp - 2 * ph, wp - 2 * pw);
    let mut out = Tensor::zeros(Shape::image(c, h, w));
    for ci in 0..c {
        let src = input.channel(ci);
        let dst = out.channel_mut(ci);
        for y in 0..h {
            dst[y * w..(y + 1) * w]
                .copy_from_slice(&src[(y + ph) * wp + pw..(y + ph) * wp + pw + w]);
        }
    }
    out
}

struct ConvGeom {
    c: usize,
    m: usize,
    kh: usize,
    kw: usize,
    sh: usize,
    sw: usize,
    hp: usize,
    wp: usize,
    oh: usize,
    ow: usize,
}

fn conv_forward(x: &Tensor, g: &ConvGeom, weights: &[f64], bias: &[f64]) -> Tensor {
    let mut out = Tensor::zeros(Shape::image(g.m, g.oh, g.ow));
    let plane = g.hp * g.wp;
    for mi in 0..g.m {
        let o = out.channel_mut(mi);
        o.fill(bias[mi]);
        for ci in 0..g.c {
            let src = &x.data()[ci * plane..(ci + 1) * plane];
            for ky in 0..g.kh {
                for kx in 0..g.kw {
                    let wv = weights[((mi * g.c + ci) * g.kh + ky) * g.kw + kx];
                    for oy in 0..g.oh {
                        let row = &src[(oy * g.sh + ky) * g.wp + kx..];
                        let dst = &mut o[oy * g.ow..(oy + 1) * g.ow];
                        if g.sw == 1 {
                            for (d, s) in dst.iter_mut().zip(&row[..g.ow]) {
                                *d += wv * s;
                            }
                        } else {
                            for (ox, d) in dst.iter_mut().enumerate() {
                                *d += wv * row[ox * g.sw];
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Returns (grad wrt padded input, grad weights, grad bias).
fn conv_backward(
    x: &Tensor,
    g: &ConvGeom,
    weights: &[f64],
    grad: &Tensor,
) -> (Tensor, Vec<f64>, Vec<f64>) {
    let plane = g.hp * g.wp;
    let mut gx = Tensor::zeros(Shape::image(g.c, g.hp, g.wp));
    let mut gw = vec![0.0; weights.len()];
    let mut gb = vec![0.0; g.m];
    for mi in 0..g.m {
        let go = grad.channel(mi);
        gb[mi] = go.iter().sum();
        for ci in 0..g.c {
            let src = &x.data()[ci * plane..(ci + 1) * plane];
            let dsrc = &mut gx.data_mut()[ci * plane..(ci + 1) * plane];
            for ky in 0..g.kh {
                for kx in 0..g.kw {
                    let wi = ((mi * g.c + ci) * g.kh + ky) * g.kw + kx;
                    let wv = weights[wi];
                    let mut acc = 0.0;
                    for oy in 0..g.oh {
                        let base = (oy * g.sh + ky) * g.wp + kx;
                        let grow = &go[oy * g.ow..(oy + 1) * g.ow];
                        if g.sw == 1 {
                            let row = &src[base..base + g.ow];
                            acc += grow.iter().zip(row).map(|(a, b)| a * b).sum::<f64>();
                            for (d, gv) in dsrc[base..base + g.ow].iter_mut().zip(grow) {
                                *d += wv * gv;
                            }
                        } else {
                            for (ox, gv) in grow.iter().enumerate() {
                                acc += gv * src[base + ox * g.sw];
                                dsrc[base + ox * g.sw] += wv * gv;
                            }
                        }
                    }
                    gw[wi] = acc;
                }
            }
        }
    }
    (gx, gw, gb)
}

fn conv_geom(layer: &LayerSpec, input: Shape) -> Result<ConvGeom, NnError> {
    let LayerSpec::Conv {
        filters,
        kernel,
        stride,
        padding,
    } = layer
    else {
        unreachable!("conv_geom on a non-conv layer")
    };
    let Shape::Image { c, h, w } = input else {
        return Err(NnError::Shape("conv needs an image input".into()));
    };
    let Shape::Image { h: oh, w: ow, .. } = layer.output_shape(input)? else {
        unreachable!()
    };
    Ok(ConvGeom {
        c,
        m: *filters,
        kh: kernel.0,
        kw: kernel.1,
        sh: stride.0,
        sw: stride.1,
        hp: h + 2 * padding.0,
        wp: w + 2 * padding.1,
        oh,
        ow,
    })
}

fn hough_channel(src: &[f64], side: usize, q: Quadrant, transposed: bool) -> Vec<f64> {
    let img =
        GrayImage::from_vec(side, src.to_vec()).expect("validated square power-of-two channel");
    fht_quadrant(&img, q, transposed).into_vec()
}

/// Applies the Hough layer (`adjoint = false`) or its adjoint (`adjoint = true`).
fn hough_apply(
    x: &Tensor,
    transposed: bool,
    quadrants: &[Quadrant],
    gain: HoughGain,
    adjoint: bool,
) -> Tensor {
    let mut t = hough_sums(x, transposed, quadrants, adjoint);
    let f = gain.factor(x.chw().1);
    if f != 1.0 {
        t.data_mut().iter_mut().for_each(|v| *v *= f);
    }
    t
}

fn hough_sums(x: &Tensor, transposed: bool, quadrants: &[Quadrant], adjoint: bool) -> Tensor {
    let (c, h, _) = x.chw();
    let nq = quadrants.len();
    match (transposed, adjoint) {
        // forward layer: C → Q·C
        (false, false) => {
            let mut out = Tensor::zeros(Shape::image(c * nq, h, h));
            for (qi, &q) in quadrants.iter().enumerate() {
                for ci in 0..c {
                    out.channel_mut(qi * c + ci).copy_from_slice(&hough_channel(
                        x.channel(ci),
                        h,
                        q,
                        false,
                    ));
                }
            }
            out
        }
        // adjoint of the forward layer: Q·C → C
        (false, true) => {
            let cin = c / nq;
            let mut out = Tensor::zeros(Shape::image(cin, h, h));
            for (qi, &q) in quadrants.iter().enumerate() {
                for ci in 0..cin {
                    let back = hough_channel(x.channel(qi * cin + ci), h, q, true);
                    for (d, v) in out.channel_mut(ci).iter_mut().zip(back) {
                        *d += v;
                    }
                }
            }
            out
        }
        // transposed layer and its adjoint: grouped, channel count preserved
        (true, adjoint) => {
            let group = c / nq;
            let mut out = Tensor::zeros(x.shape());
            for (qi, &q) in quadrants.iter().enumerate() {
                for ci in qi * group..(qi + 1) * group {
                    out.channel_mut(ci).copy_from_slice(&hough_channel(
                        x.channel(ci),
                        h,
                        q,
                        !adjoint,
                    ));
                }
            }
            out
        }
    }
}

/// Forward pass of a single layer. `params` holds the layer's weight and bias
/// blobs (empty for parameter-free layers).
pub fn layer_forward(
    layer: &LayerSpec,
    input: &Tensor,
    params: &[Param],
) -> Result<Tensor, NnError> {
    let out_shape = layer.output_shape(input.shape())?;
    let expected = layer.param_dims(input.shape());
    if params.len() != expected.len() || params.iter().zip(&expected).any(|(p, d)| &p.dims != d) {
        return Err(NnError::Shape(format!(
            "{} layer got parameters of the wrong shape",
            layer.kind()
        )));
    }
    let out = match layer {
        LayerSpec::Conv { padding, .. } => {
            let g = conv_geom(layer, input.shape())?;
            conv_forward(
                &padded(input, padding.0, padding.1),
                &g,
                &params[0].data,
                &params[1].data,
            )
        }
        LayerSpec::Pad { margin } => padded(input, margin.0, margin.1),
        LayerSpec::Activation(act) => Tensor::from_vec(
            input.shape(),
            input.data().iter().map(|&x| activate(*act, x)).collect(),
        )?,
        LayerSpec::Fht {
            transposed,
            quadrants,
            gain,
        } => hough_apply(input, *transposed, quadrants, *gain, false),
        LayerSpec::Dense { outputs } => {
            let n = input.len();
            let (w, b) = (&params[0].data, &params[1].data);
            let x = input.data();
            let data = (0..*outputs)
                .map(|o| {
                    b[o] + w[o * n..(o + 1) * n]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                })
                .collect();
            Tensor::from_vec(out_shape, data)?
        }
        LayerSpec::Softmax => {
            let max = input
                .data()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            let exp: Vec<f64> = input.data().iter().map(|&v| (v - max).exp()).collect();
            let total: f64 = exp.iter().sum();
            Tensor::from_vec(out_shape, exp.into_iter().map(|e| e / total).collect())?
        }
    };
    debug_assert_eq!(out.shape(), out_shape);
    Ok(out)
}

/// Backward pass of a single layer: gradient with respect to the layer input
/// and one gradient vector per parameter blob.
pub fn layer_backward(
    layer: &LayerSpec,
    params: &[Param],
    cache: Option<&LayerCache>,
    grad_out: &Tensor,
) -> Result<(Tensor, Vec<Vec<f64>>), NnError> {
    let cache = cache.ok_or(NnError::MissingCache)?;
    let input = &cache.input;
    if grad_out.shape() != cache.output.shape() {
        return Err(NnError::Shape(format!(
            "{} backward got gradient {} for output {}",
            layer.kind(),
            grad_out.shape(),
            cache.output.shape()
        )));
    }
    Ok(match layer {
        LayerSpec::Conv { padding, .. } => {
            let g = conv_geom(layer, input.shape())?;
            let x = padded(input, padding.0, padding.1);
            let (gx, gw, gb) = conv_backward(&x, &g, &params[0].data, grad_out);
            (cropped(&gx, padding.0, padding.1), vec![gw, gb])
        }
        LayerSpec::Pad { margin } => (cropped(grad_out, margin.0, margin.1), Vec::new()),
        LayerSpec::Activation(act) => {
            let y = cache.output.data();
            let x = input.data();
            let data = grad_out
                .data()
                .iter()
                .enumerate()
                .map(|(i, &g)| {
                    g * match *act {
                        Activation::Tanh => 1.0 - y[i] * y[i],
                        Activation::Relu => f64::from(x[i] > 0.0),
                        Activation::Rf { a, b } => rf_derivative(x[i], a, b),
                    }
                })
                .collect();
            (Tensor::from_vec(input.shape(), data)?, Vec::new())
        }
        LayerSpec::Fht {
            transposed,
            quadrants,
            gain,
        } => (
            hough_apply(grad_out, *transposed, quadrants, *gain, true),
            Vec::new(),
        ),
        LayerSpec::Dense { outputs } => {
            let n = input.len();
            let w = &params[0].data;
            let x = input.data();
            let g = grad_out.data();
            let mut gx = vec![0.0; n];
            let mut gw = vec![0.0; outputs * n];
            for o in 0..*outputs {
                let wrow = &w[o * n..(o + 1) * n];
                for i in 0..n {
                    gx[i] += g[o] * wrow[i];
                    gw[o * n + i] = g[o] * x[i];
                }
            }
            (Tensor::from_vec(input.shape(), gx)?, vec![gw, g.to_vec()])
        }
        LayerSpec::Softmax => {
            let y = cache.output.data();
            let g = grad_out.data();
            let inner: f64 = y.iter().zip(g).map(|(a, b)| a * b).sum();
            let data = y.iter().zip(g).map(|(yi, gi)| yi * (gi - inner)).collect();
            (Tensor::from_vec(input.shape(), data)?, Vec::new())
        }
    })
}
