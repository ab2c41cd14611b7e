//! A small dense neural-network engine with Hough transform layers.
//!
//! Everything runs in `f64`. The Hough layers have no parameters: the forward
//! layer's backward pass is the transposed transform and vice versa, so
//! gradients flow through them exactly.

mod complexity;
mod gradcheck;
mod layers;
mod model_io;
mod network;
mod spec;
mod tensor;
mod train;

use thiserror::Error;

pub use complexity::{complexity_report, ComplexityReport, LayerOps, PairRatio};
pub use gradcheck::{gradient_check, GradCheckConfig, GradCheckReport};
pub use layers::{layer_backward, layer_forward, rf_activation, rf_derivative, LayerCache};
pub use model_io::{decode_model, encode_model, load_model, save_model, MODEL_MAGIC};
pub use network::{heatmap_target, loss_and_grad, LossKind, Network, Param, Target, Trace};
pub use spec::{
    build_base_arch, build_conv_only_arch, build_fht_arch, Activation, AffineMap, ArchScale,
    HoughGain, LayerSpec, NetworkSpec, ToyArch, PAPER_INPUT_SIDE, PAPER_PARAM_COUNT,
};
pub use tensor::{Shape, Tensor};
pub use train::{
    sample_gradient, train, train_network, EpochMetrics, Optimizer, TrainConfig, TrainOutcome,
    TrainSample,
};

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("layer {layer}: {source}")]
    InLayer {
        layer: usize,
        #[source]
        source: Box<NnError>,
    },
    #[error("backward pass needs the forward cache")]
    MissingCache,
    #[error("training diverged at epoch {epoch}, step {step}: loss = {loss}")]
    Divergence {
        epoch: usize,
        step: usize,
        loss: f64,
    },
    #[error("model file corrupt at byte {offset}: {message}")]
    ModelFormat { offset: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl NnError {
    fn in_layer(self, layer: usize) -> NnError {
        match self {
            e @ NnError::InLayer { .. } => e,
            e => NnError::InLayer {
                layer,
                source: Box::new(e),
            },
        }
    }

    /// The error with any layer context stripped.
    pub fn root(&self) -> &NnError {
        match self {
            NnError::InLayer { source, .. } => source.root(),
            e => e,
        }
    }
}
