//! A two-layer ReLU MLP trained with minibatches on synthetic Gaussian blobs.

mod data;
mod mlp;
mod train;

pub use data::{make_blobs, Batch, Dataset};
pub use mlp::{MlpModel, TENSOR_IDS};
pub use train::{train, EpochSummary, TrainConfig, TrainLog, LR_DROP_FACTOR};

pub const DEFAULT_HIDDEN: usize = 32;
pub const DEFAULT_INPUT_DIM: usize = 20;
pub const DEFAULT_CLASSES: usize = 5;
pub const DEFAULT_SAMPLES: usize = 2000;
pub const DEFAULT_SPREAD: f64 = 1.0;
pub const DEFAULT_BATCH_SIZE: usize = 64;
