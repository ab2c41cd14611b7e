//! Vanishing-point task layer: synthetic scenes, grid evaluation, blur
//! corruption and the classical accumulate-and-back-project baseline.

mod benchmark;
mod classical;
mod corrupt;
mod eval;
mod predictor;
mod synth;

use thiserror::Error;

pub use benchmark::VpBenchmark;
pub use classical::{
    back_projection, classical_vp, classical_vp_with, edge_prefilter, ClassicalVp,
};
pub use corrupt::{blur_corrupt, corruption_sweep, gaussian_kernel, CorruptionSpec, SweepRow};
pub use eval::{evaluate, grid_cell, predict_vp, rank_pixels, EvalRecord, EvalReport};
pub use predictor::{
    heatmap_samples, image_tensor, ClassicalPredictor, NetworkPredictor, VpPredictor, HEATMAP_SIGMA,
};
pub use synth::{
    read_dataset, sample_filename, synth_generate, write_dataset, Dataset, Sample, SampleMeta,
    SynthConfig,
};

#[derive(Debug, Error)]
pub enum VpError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{file}:{line}: {message}")]
    Format {
        file: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Pgm(#[from] crate::pgm::PgmError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
