//! Adam, diffGrad, Radam and AdaBelief, each with and without historical
//! gradient-norm correction.

mod adanorm;
mod hyper;
mod optimizer;
mod steppers;

pub use adanorm::{adanorm_correct, correction_factor, update_history, Correction};
pub use hyper::{Family, HyperParams, NormScope, NormTarget, OptimizerKind};
pub use optimizer::{make_optimizer, Optimizer};
pub use steppers::{
    radam_rectifier, radam_rho, step_adabelief, step_adabeliefnorm, step_adam, step_adamnorm,
    step_diffgrad, step_diffgradnorm, step_kind, step_radam, step_radamnorm, OptState, StepReport,
};
