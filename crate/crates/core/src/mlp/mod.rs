//! From-scratch dense feedforward classifier trained with Adam.

mod activation;
mod adam;
mod loss;
mod matrix;
mod network;
mod train;

pub use activation::{activation_apply, activation_derivative, ActivationKind};
pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{cross_entropy, softmax, CLIP_EPS};
pub use matrix::DenseMatrix;
pub use network::{layer_sizes_for, ForwardCache, Gradients, MlpModel, OUTPUT_CLASSES};
pub use train::{train, EpochTrace, TrainConfig};
