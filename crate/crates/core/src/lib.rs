//! Adaptive gradient optimizers with historical gradient-norm correction.
//!
//! The crate provides Adam, diffGrad, Radam and AdaBelief together with their
//! norm-corrected variants (AdamNorm, diffGradNorm, RadamNorm, AdaBeliefNorm),
//! the differentiable test problems and online loss sequences used to study
//! them, a small from-scratch MLP for stochastic minibatch experiments, and
//! CSV/SVG telemetry.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the experiment runner uses.

pub mod error;
pub mod nn;
pub mod optim;
pub mod problems;
pub mod rng;
pub mod scalar;
pub mod telemetry;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Tensor = tensor::Tensor<f64>;
pub type Tensor32 = tensor::Tensor<f32>;
pub type HyperParams = optim::HyperParams<f64>;
pub type HyperParams32 = optim::HyperParams<f32>;
pub type OptState = optim::OptState<f64>;
pub type StepReport = optim::StepReport<f64>;
pub type Optimizer = optim::Optimizer<f64>;
pub type Optimizer32 = optim::Optimizer<f32>;
pub type LossSequence = problems::LossSequence<f64>;
pub type Dataset = nn::Dataset<f64>;
pub type MlpModel = nn::MlpModel<f64>;

pub use optim::{NormScope, NormTarget, OptimizerKind};
