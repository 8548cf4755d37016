//! Desk-scale training harness.
//!
//! A synthetic compositional dataset stands in for image/caption pairs, two
//! linear encoders stand in for the towers, and training logs a
//! [`GradientReport`](crate::graddiag::GradientReport) at every step.

mod dataset;
mod encoder;
mod eval;
mod train;

pub use dataset::{rescale_displacement, Scene, ToyDataset, ToyDatasetConfig, VocabSizes, SLOTS};
pub use encoder::{DualEncoder, EncoderGradients, LinearEncoder, StepOutput};
pub use eval::{evaluate, spearman, EvalReport};
pub use train::{
    encoder_batch_sweep, read_config, train, write_trace_csv, LossKind, ToyConfig, TraceRow,
    TrainConfig, TrainOutcome,
};
