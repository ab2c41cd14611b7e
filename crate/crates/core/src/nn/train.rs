use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{loss_and_grad, LossKind, Network, NetworkSpec, NnError, Target, Tensor};

/// One training example.
#[derive(Clone, Debug)]
pub struct TrainSample {
    pub input: Tensor,
    pub target: Target,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Seeds both the initialization and the per-epoch shuffles.
    pub seed: u64,
    pub loss: LossKind,
    /// Heavy-ball momentum for [`Optimizer::Sgd`]; 0 is plain SGD.
    pub momentum: f64,
    pub optimizer: Optimizer,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            batch_size: 16,
            epochs: 10,
            seed: 0,
            loss: LossKind::HeatmapSse,
            momentum: 0.0,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), NnError> {
        if !(self.learning_rate > 0.0)
            || self.batch_size == 0
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(NnError::Config(format!(
                "need learning_rate > 0, batch_size > 0, 0 <= momentum < 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean per-sample loss over the epoch, measured before each update.
    pub mean_loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub network: Network,
    pub history: Vec<EpochMetrics>,
}

/// Loss and parameter gradients of one sample.
pub fn sample_gradient(
    net: &Network,
    sample: &TrainSample,
    loss: LossKind,
) -> Result<(f64, Vec<Vec<f64>>), NnError> {
    let trace = net.forward(&sample.input)?;
    let (value, g) = loss_and_grad(loss, trace.output(), &sample.target)?;
    let (grads, _) = net.backward(&trace, &g)?;
    Ok((value, grads))
}

/// Minibatch training from a seeded initialization of `spec`.
pub fn train(
    spec: &NetworkSpec,
    data: &[TrainSample],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, NnError> {
    let net = Network::init(spec.clone(), cfg.seed)?;
    train_network(net, data, cfg, |_| {})
}

/// Minibatch training starting from `net`. Gradients of a batch are computed in
/// parallel and summed in sample order, so results do not depend on the
/// number of worker threads.
pub fn train_network(
    mut net: Network,
    data: &[TrainSample],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome, NnError> {
    cfg.validate()?;
    if data.is_empty() && cfg.epochs > 0 {
        return Err(NnError::Config("empty training set".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut velocity: Vec<Vec<f64>> = net
        .params()
        .iter()
        .map(|p| vec![0.0; p.data.len()])
        .collect();
    let mut second: Vec<Vec<f64>> = velocity.clone();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut step = 0usize;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results: Vec<Result<(f64, Vec<Vec<f64>>), NnError>> = batch
                .par_iter()
                .map(|&i| sample_gradient(&net, &data[i], cfg.loss))
                .collect();
            let mut sum: Vec<Vec<f64>> = net
                .params()
                .iter()
                .map(|p| vec![0.0; p.data.len()])
                .collect();
            let mut batch_loss = 0.0;
            for r in results {
                let (loss, grads) = r?;
                batch_loss += loss;
                for (acc, g) in sum.iter_mut().zip(&grads) {
                    for (a, v) in acc.iter_mut().zip(g) {
                        *a += v;
                    }
                }
            }
            if !batch_loss.is_finite() {
                return Err(NnError::Divergence {
                    epoch,
                    step,
                    loss: batch_loss,
                });
            }
            total += batch_loss;
            let inv = 1.0 / batch.len() as f64;
            step += 1;
            match cfg.optimizer {
                Optimizer::Sgd => {
                    for ((param, g), v) in net.params_mut().iter_mut().zip(&sum).zip(&mut velocity)
                    {
                        for ((p, gi), vi) in param.data.iter_mut().zip(g).zip(v.iter_mut()) {
                            *vi = cfg.momentum * *vi - cfg.learning_rate * inv * gi;
                            *p += *vi;
                        }
                    }
                }
                Optimizer::Adam => {
                    let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
                    let c1 = 1.0 - b1.powi(step as i32);
                    let c2 = 1.0 - b2.powi(step as i32);
                    for (((param, g), m), v) in net
                        .params_mut()
                        .iter_mut()
                        .zip(&sum)
                        .zip(&mut velocity)
                        .zip(&mut second)
                    {
                        for (((p, gi), mi), vi) in param
                            .data
                            .iter_mut()
                            .zip(g)
                            .zip(m.iter_mut())
                            .zip(v.iter_mut())
                        {
                            let gi = gi * inv;
                            *mi = b1 * *mi + (1.0 - b1) * gi;
                            *vi = b2 * *vi + (1.0 - b2) * gi * gi;
                            *p -= cfg.learning_rate * (*mi / c1) / ((*vi / c2).sqrt() + eps);
                        }
                    }
                }
            }
        }
        let metrics = EpochMetrics {
            epoch,
            mean_loss: total / data.len() as f64,
        };
        on_epoch(&metrics);
        history.push(metrics);
    }
    Ok(TrainOutcome {
        network: net,
        history,
    })
}
