//! Deterministic differentiable objectives.
//!
//! * [`quadratic_bowl`] and [`rosenbrock`]: standard analytic benchmarks.
//! * [`scenario_curvature`]: 1-D curvatures with a flat plateau, a steep
//!   ramp, and a narrow valley.
//! * [`convex_sequence`] and [`regret`]: online convex loss sequences and the
//!   cumulative-regret harness.

mod analytic;
mod online;
mod scenario;

pub use analytic::{quadratic_bowl, rosenbrock, QuadraticBowl, Rosenbrock};
pub use online::{
    convex_sequence, fit_sqrt, play, regret, regret_at_horizons, ConvexLoss, LossSequence,
    RegretPoint, SequenceGenerator, SqrtFit, StepSchedule, CENTER_JITTER, GRID_RESOLUTION,
    SEQUENCE_DIM,
};
pub use scenario::{scenario_curvature, Scenario, ScenarioKind};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// A differentiable objective.
pub trait Problem<T: Scalar>: Send + Sync {
    fn name(&self) -> String;

    fn dim(&self) -> usize;

    /// Loss and gradient at `x`.
    fn eval(&self, x: &Tensor<T>) -> Result<(T, Tensor<T>)>;

    /// Known minimizer and minimum value, if any.
    fn optimum(&self) -> Option<(Tensor<T>, T)> {
        None
    }

    /// Conventional starting point for benchmarks.
    fn start_point(&self) -> Tensor<T>;
}

pub(crate) fn check_dim<T: Scalar>(x: &Tensor<T>, dim: usize) -> Result<()> {
    if x.shape() != [dim] {
        return Err(Error::ShapeMismatch {
            left: x.shape().to_vec(),
            right: vec![dim],
        });
    }
    Ok(())
}

/// Central-difference gradient estimate with step `h`. Uses only loss values.
pub fn finite_difference_gradient<T: Scalar, P: Problem<T> + ?Sized>(
    problem: &P,
    x: &Tensor<T>,
    h: T,
) -> Result<Tensor<T>> {
    let two = T::lit(2.0);
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let (plus, _) = problem.eval(&probe)?;
        probe.data_mut()[i] = orig - h;
        let (minus, _) = problem.eval(&probe)?;
        probe.data_mut()[i] = orig;
        grad.push((plus - minus) / (two * h));
    }
    Tensor::from_vec(grad, x.shape().to_vec())
}

/// Largest relative deviation between two gradients, with relative error
/// measured against `max(|a|, |b|, floor)` per component.
pub fn max_relative_error<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, floor: T) -> T {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(T::zero(), T::max)
}
