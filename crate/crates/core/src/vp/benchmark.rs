//! The fixed desk-scale vanishing-point experiment: data, architecture and
//! training settings shared by the acceptance suite, the CLI defaults and the
//! `vp_experiment` example.

use crate::fht::Quadrant;
use crate::nn::{Optimizer, ToyArch, TrainConfig};

use super::{synth_generate, Dataset, SynthConfig, VpError};

#[derive(Clone, Debug, PartialEq)]
pub struct VpBenchmark {
    /// Generator for the training split; the test split reuses it with
    /// `test_seed`.
    pub synth: SynthConfig,
    pub test_seed: u64,
    pub arch: ToyArch,
    pub train: TrainConfig,
    pub heatmap_sigma: f64,
}

impl Default for VpBenchmark {
    /// Rays leaving the vanishing point with a 4–10 px blank disc around it,
    /// so the point itself carries no local evidence, and a stride-1 toy
    /// network whose Hough layers run at the full 64×64 resolution.
    fn default() -> Self {
        VpBenchmark {
            synth: SynthConfig {
                samples: 2000,
                convergent_lines: (4, 6),
                distractors: (0, 2),
                vp_gap: (4.0, 10.0),
                rays: true,
                seed: 1,
                ..SynthConfig::default()
            },
            test_seed: 2,
            arch: ToyArch {
                channels: 2,
                quadrants: Quadrant::ALL.to_vec(),
                stride: 1,
                ..ToyArch::default()
            },
            train: TrainConfig {
                learning_rate: 0.002,
                epochs: 15,
                optimizer: Optimizer::Adam,
                ..TrainConfig::default()
            },
            heatmap_sigma: 1.5,
        }
    }
}

impl VpBenchmark {
    pub fn train_set(&self, samples: usize) -> Result<Dataset, VpError> {
        synth_generate(&SynthConfig {
            samples,
            ..self.synth.clone()
        })
    }

    pub fn test_set(&self, samples: usize) -> Result<Dataset, VpError> {
        synth_generate(&SynthConfig {
            samples,
            seed: self.test_seed,
            ..self.synth.clone()
        })
    }
}
