use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{l2_norm_of, Tensor};

use super::hyper::{HyperParams, NormScope, OptimizerKind};
use super::steppers::{check_inputs, step_kind, OptState, StepReport};

/// A stepper over a fixed list of parameter tensors.
///
/// Holds one [`OptState`] per tensor. In [`NormScope::Global`] the gradient
/// norm is taken over the concatenation of all gradients and a single
/// history is shared by every tensor.
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    hp: HyperParams<T>,
    states: Vec<OptState<T>>,
    shared_e: T,
}

/// Builds a fresh stepper for parameters of the given shapes.
pub fn make_optimizer<T: Scalar>(
    kind: OptimizerKind,
    hp: HyperParams<T>,
    param_shapes: &[Vec<usize>],
) -> Result<Optimizer<T>> {
    Optimizer::new(kind, hp, param_shapes)
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(
        kind: OptimizerKind,
        hp: HyperParams<T>,
        param_shapes: &[Vec<usize>],
    ) -> Result<Self> {
        hp.validate()?;
        if param_shapes.is_empty() {
            return Err(Error::Empty("parameter shapes"));
        }
        if let Some(bad) = param_shapes.iter().find(|s| s.is_empty() || s.contains(&0)) {
            return Err(Error::InvalidArgument(format!(
                "invalid parameter shape {bad:?}"
            )));
        }
        Ok(Self {
            kind,
            hp,
            states: param_shapes.iter().map(|s| OptState::new(s)).collect(),
            shared_e: T::zero(),
        })
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn hyper_params(&self) -> &HyperParams<T> {
        &self.hp
    }

    pub fn learning_rate(&self) -> T {
        self.hp.alpha
    }

    /// Changes the step size for subsequent steps (schedules, decay).
    pub fn set_learning_rate(&mut self, alpha: T) {
        self.hp.alpha = alpha;
    }

    pub fn states(&self) -> &[OptState<T>] {
        &self.states
    }

    /// Number of completed steps.
    pub fn steps(&self) -> u64 {
        self.states[0].t
    }

    /// Applies one update to every tensor. Inputs are validated up front, so a
    /// failed call leaves parameters and state untouched.
    pub fn step(
        &mut self,
        params: &mut [Tensor<T>],
        grads: &[Tensor<T>],
    ) -> Result<Vec<StepReport<T>>> {
        if params.len() != self.states.len() || grads.len() != self.states.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} parameter/gradient tensors, got {}/{}",
                self.states.len(),
                params.len(),
                grads.len()
            )));
        }
        for ((state, p), g) in self.states.iter().zip(params.iter()).zip(grads) {
            check_inputs(state, p, g)?;
        }

        match self.hp.norm_scope {
            NormScope::PerTensor => self
                .states
                .iter_mut()
                .zip(params.iter_mut())
                .zip(grads)
                .map(|((state, p), g)| step_kind(self.kind, state, p, g, &self.hp, None))
                .collect(),
            NormScope::Global => {
                let flat: Vec<T> = grads
                    .iter()
                    .flat_map(|g| g.data().iter().copied())
                    .collect();
                let global = l2_norm_of(&flat);
                let e_prev = self.shared_e;
                let reports = self
                    .states
                    .iter_mut()
                    .zip(params.iter_mut())
                    .zip(grads)
                    .map(|((state, p), g)| {
                        state.e = e_prev;
                        step_kind(self.kind, state, p, g, &self.hp, Some(global))
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.shared_e = reports[0].e_after;
                Ok(reports)
            }
        }
    }
}
