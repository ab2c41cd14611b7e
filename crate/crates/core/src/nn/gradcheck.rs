//! Whole-network gradient verification by central differences.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{loss_and_grad, sample_gradient, LossKind, Network, NnError, TrainSample};

#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    /// Parameters probed; capped at the network's parameter count.
    pub samples: usize,
    pub step: f64,
    /// Lower bound on the denominator of the relative error, as a fraction of
    /// the largest analytic gradient entry. Round-off in the loss limits the
    /// absolute accuracy of any difference quotient, so entries far below the
    /// gradient's scale are compared against this instead of their own size.
    pub floor: f64,
    pub seed: u64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            samples: 128,
            step: 3e-5,
            floor: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GradCheckReport {
    /// `max |analytic − numeric| / max(|analytic|, |numeric|, floor·max|analytic|)`.
    pub max_rel_error: f64,
    pub checked: usize,
    /// Flat parameter index of the worst entry.
    pub worst_index: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

/// Compares back-propagated gradients with fourth-order central differences
/// on a random subset of parameters.
pub fn gradient_check(
    net: &Network,
    sample_data: &TrainSample,
    loss: LossKind,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport, NnError> {
    let (_, grads) = sample_gradient(net, sample_data, loss)?;
    let flat_grad: Vec<f64> = grads.into_iter().flatten().collect();
    let floor = cfg.floor * flat_grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let total = flat_grad.len();
    if total == 0 {
        return Err(NnError::Config("network has no parameters to check".into()));
    }
    let mut locate = Vec::with_capacity(total);
    for (bi, p) in net.params().iter().enumerate() {
        locate.extend((0..p.data.len()).map(|k| (bi, k)));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = sample(&mut rng, total, cfg.samples.min(total));
    let eval = |net: &Network| -> Result<f64, NnError> {
        let out = net.predict(&sample_data.input)?;
        Ok(loss_and_grad(loss, &out, &sample_data.target)?.0)
    };

    let mut probe = net.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        worst_index: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    for flat in picks.iter() {
        let (bi, k) = locate[flat];
        let original = probe.params()[bi].data[k];
        let mut at = |offset: f64| -> Result<f64, NnError> {
            probe.params_mut()[bi].data[k] = original + offset;
            eval(&probe)
        };
        let h = cfg.step;
        let numeric = (8.0 * (at(h)? - at(-h)?) - (at(2.0 * h)? - at(-2.0 * h)?)) / (12.0 * h);
        probe.params_mut()[bi].data[k] = original;
        let analytic = flat_grad[flat];
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor);
        if rel > report.max_rel_error || report.checked == 0 {
            report.max_rel_error = rel;
            report.worst_index = flat;
            report.worst_analytic = analytic;
            report.worst_numeric = numeric;
        }
        report.checked += 1;
    }
    Ok(report)
}
