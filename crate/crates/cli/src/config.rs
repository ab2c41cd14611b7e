//! `key=value` run configuration shared by the dataset, training and
//! evaluation commands.

use std::path::PathBuf;

use fhtnet::fht::Quadrant;
use fhtnet::nn::{
    build_conv_only_arch, build_fht_arch, ArchScale, NetworkSpec, Optimizer, ToyArch, TrainConfig,
};
use fhtnet::vp::{SynthConfig, VpBenchmark};

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Arch {
    Fht,
    ConvOnly,
    Paper,
    /// The non-learning back-projection baseline.
    Classical,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub data_dir: Option<PathBuf>,
    pub test_dir: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub loss_csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub arch: Arch,
    pub channels: usize,
    pub stride: usize,
    pub quadrants: Vec<Quadrant>,
    pub train: TrainConfig,
    pub heatmap_sigma: f64,
    pub grids: Vec<usize>,
    pub sweep_sides: Vec<usize>,
}

impl Default for RunConfig {
    /// The benchmark settings, with the generator's 100-sample default.
    fn default() -> Self {
        let bench = VpBenchmark::default();
        RunConfig {
            synth: SynthConfig {
                samples: SynthConfig::default().samples,
                ..bench.synth
            },
            data_dir: None,
            test_dir: None,
            model: None,
            loss_csv: None,
            report: None,
            arch: Arch::Fht,
            channels: bench.arch.channels,
            stride: bench.arch.stride,
            quadrants: bench.arch.quadrants,
            train: bench.train,
            heatmap_sigma: bench.heatmap_sigma,
            grids: vec![10, 20, 30],
            sweep_sides: vec![0, 4, 8, 12, 16],
        }
    }
}

fn list<T: std::str::FromStr>(value: &str) -> Option<Vec<T>> {
    value.split(',').map(|s| s.trim().parse().ok()).collect()
}

fn pair<T: std::str::FromStr + Copy>(value: &str) -> Option<(T, T)> {
    match list::<T>(value)?.as_slice() {
        [a, b] => Some((*a, *b)),
        _ => None,
    }
}

impl RunConfig {
    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        let bad = || format!("invalid value {value:?} for {key}");
        macro_rules! parse {
            ($e:expr) => {
                $e.ok_or_else(bad)?
            };
        }
        match key.trim() {
            "image_side" => self.synth.image_side = parse!(value.parse().ok()),
            "samples" => self.synth.samples = parse!(value.parse().ok()),
            "convergent_lines" => self.synth.convergent_lines = parse!(pair(value)),
            "distractors" => self.synth.distractors = parse!(pair(value)),
            "intensity" => self.synth.intensity = parse!(pair(value)),
            "width" => self.synth.width = parse!(pair(value)),
            "noise_sigma" => self.synth.noise_sigma = parse!(value.parse().ok()),
            "vp_region" => {
                let v: Vec<f64> = parse!(list(value));
                let [a, b, c, d] = v.as_slice() else {
                    return Err(bad());
                };
                self.synth.vp_region = (*a, *b, *c, *d);
            }
            "vp_gap" => self.synth.vp_gap = parse!(pair(value)),
            "rays" => self.synth.rays = parse!(value.parse().ok()),
            "seed" => {
                let seed = parse!(value.parse().ok());
                self.synth.seed = seed;
                self.train.seed = seed;
            }
            "data_dir" => self.data_dir = Some(value.into()),
            "test_dir" => self.test_dir = Some(value.into()),
            "model" => self.model = Some(value.into()),
            "loss_csv" => self.loss_csv = Some(value.into()),
            "report" => self.report = Some(value.into()),
            "arch" => {
                self.arch = match value {
                    "fht" => Arch::Fht,
                    "conv-only" => Arch::ConvOnly,
                    "paper" => Arch::Paper,
                    "classical" => Arch::Classical,
                    _ => {
                        return Err(format!(
                            "arch must be fht, conv-only, paper or classical, got {value:?}"
                        ))
                    }
                }
            }
            "channels" => self.channels = parse!(value.parse().ok()),
            "stride" => self.stride = parse!(value.parse().ok()),
            "quadrants" => {
                self.quadrants = parse!(value
                    .split(',')
                    .map(|s| Quadrant::parse(s.trim()))
                    .collect::<Option<Vec<_>>>())
            }
            "epochs" => self.train.epochs = parse!(value.parse().ok()),
            "learning_rate" => self.train.learning_rate = parse!(value.parse().ok()),
            "batch_size" => self.train.batch_size = parse!(value.parse().ok()),
            "optimizer" => {
                self.train.optimizer = match value {
                    "sgd" => Optimizer::Sgd,
                    "adam" => Optimizer::Adam,
                    _ => return Err(format!("optimizer must be sgd or adam, got {value:?}")),
                }
            }
            "momentum" => self.train.momentum = parse!(value.parse().ok()),
            "heatmap_sigma" => self.heatmap_sigma = parse!(value.parse().ok()),
            "grids" => self.grids = parse!(list(value)),
            "sweep_sides" => self.sweep_sides = parse!(list(value)),
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Parses a config file body. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, source: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!("{source}:{}: expected key=value", i + 1))
            })?;
            cfg.set(k, v)
                .map_err(|m| CliError::usage(format!("{source}:{}: {m}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(
        path: Option<&std::path::Path>,
        overrides: &[String],
    ) -> Result<RunConfig, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::usage(format!("cannot read config {}: {e}", p.display()))
                })?;
                RunConfig::parse(&text, &p.display().to_string())?
            }
            None => RunConfig::default(),
        };
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("override {o:?} is not key=value")))?;
            cfg.set(k, v)
                .map_err(|m| CliError::usage(format!("override {o:?}: {m}")))?;
        }
        Ok(cfg)
    }

    pub fn network_spec(&self, input_side: usize) -> Result<NetworkSpec, CliError> {
        let toy = ToyArch {
            input_side,
            input_channels: 1,
            channels: self.channels,
            stride: self.stride,
            quadrants: self.quadrants.clone(),
        };
        let spec = match self.arch {
            Arch::Fht => build_fht_arch(&ArchScale::Toy(toy)),
            Arch::ConvOnly => build_conv_only_arch(&toy),
            Arch::Paper => build_fht_arch(&ArchScale::Paper),
            Arch::Classical => {
                return Err(CliError::usage("the classical baseline is not a network"))
            }
        };
        spec.map_err(|e| CliError::usage(format!("cannot build network: {e}")))
    }
}
