//! Single-tensor update rules for the eight optimizers.
//!
//! Each `step_*` function advances one [`OptState`] by one step, updates
//! `params` in place and reports what happened. The norm-corrected variants
//! differ from their base rule only in which gradient feeds the moments.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{sigmoid, Tensor};

use super::adanorm::{correction_factor, update_history};
use super::hyper::{powi, Family, HyperParams, NormTarget, OptimizerKind};

/// Per-tensor optimizer memory. All buffers start at zero and `t` at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState<T> {
    pub m: Tensor<T>,
    pub v: Tensor<T>,
    /// Gradient-norm history. Maintained for every kind so base optimizers can
    /// be compared against the history their corrected variant would see.
    pub e: T,
    /// Previous raw gradient (used by the diffGrad family).
    pub prev_grad: Tensor<T>,
    pub t: u64,
}

impl<T: Scalar> OptState<T> {
    pub fn new(shape: &[usize]) -> Self {
        Self {
            m: Tensor::zeros(shape),
            v: Tensor::zeros(shape),
            e: T::zero(),
            prev_grad: Tensor::zeros(shape),
            t: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport<T> {
    /// Norm compared against the history (the global norm in global scope).
    pub g_norm: T,
    pub e_after: T,
    pub correction_applied: bool,
    /// `theta_t - theta_{t-1}`.
    pub effective_update: Tensor<T>,
    /// Radam family only: whether the rectified branch was taken.
    pub rectified: Option<bool>,
}

/// `(rho_inf, rho_t)` of the Radam variance rectification.
pub fn radam_rho<T: Scalar>(beta2: T, t: u64) -> (T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let rho_inf = two / (one - beta2) - one;
    let beta2_t = powi(beta2, t);
    let rho_t = rho_inf - two * T::lit(t as f64) * beta2_t / (one - beta2_t);
    (rho_inf, rho_t)
}

/// Step-size multiplier of the rectified branch, or `None` when `rho_t < 5`.
pub fn radam_rectifier<T: Scalar>(beta2: T, t: u64) -> Option<T> {
    let (rho_inf, rho_t) = radam_rho(beta2, t);
    let four = T::lit(4.0);
    let two = T::lit(2.0);
    (rho_t >= T::lit(5.0)).then(|| {
        let rho_u = (rho_t - four) * (rho_t - two) * rho_inf;
        let rho_d = (rho_inf - four) * (rho_inf - two) * rho_t;
        ((T::one() - beta2) * rho_u / rho_d).sqrt()
    })
}

pub fn step_adam<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::Adam, state, params, g, hp, None)
}

pub fn step_adamnorm<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::AdamNorm, state, params, g, hp, None)
}

pub fn step_diffgrad<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::DiffGrad, state, params, g, hp, None)
}

pub fn step_diffgradnorm<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::DiffGradNorm, state, params, g, hp, None)
}

pub fn step_radam<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::Radam, state, params, g, hp, None)
}

pub fn step_radamnorm<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::RadamNorm, state, params, g, hp, None)
}

pub fn step_adabelief<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::AdaBelief, state, params, g, hp, None)
}

pub fn step_adabeliefnorm<T: Scalar>(
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
) -> Result<StepReport<T>> {
    step_kind(OptimizerKind::AdaBeliefNorm, state, params, g, hp, None)
}

pub(crate) fn check_inputs<T: Scalar>(
    state: &OptState<T>,
    params: &Tensor<T>,
    g: &Tensor<T>,
) -> Result<()> {
    params.check_same_shape(g)?;
    state.m.check_same_shape(params)?;
    if !g.is_finite() {
        return Err(Error::NonFinite {
            what: "gradient",
            step: state.t + 1,
        });
    }
    Ok(())
}

/// Advances `state` by one step of `kind`.
///
/// `g_norm_override` substitutes the norm used by the history recurrence and
/// the correction test (global norm scope).
pub fn step_kind<T: Scalar>(
    kind: OptimizerKind,
    state: &mut OptState<T>,
    params: &mut Tensor<T>,
    g: &Tensor<T>,
    hp: &HyperParams<T>,
    g_norm_override: Option<T>,
) -> Result<StepReport<T>> {
    check_inputs(state, params, g)?;
    let one = T::one();

    state.t += 1;
    let t = state.t;

    let g_norm = g_norm_override.unwrap_or_else(|| g.l2_norm());
    let e_new = update_history(state.e, hp.gamma, g_norm);
    state.e = e_new;
    let factor = if kind.is_norm_corrected() {
        correction_factor(e_new, g_norm)
    } else {
        None
    };

    // Corrected gradient for element i; identical to g when not firing.
    let (first_uses_s, second_uses_s) = match hp.norm_target {
        NormTarget::FirstMoment => (true, false),
        NormTarget::SecondMoment => (false, true),
        NormTarget::BothMoments => (true, true),
    };
    let corrected = |x: T| match factor {
        Some(f) => f * x,
        None => x,
    };

    let beta1_t = hp.beta1_at(t);
    let beta2 = hp.beta2;
    let family = kind.family();

    {
        let m = state.m.data_mut();
        let v = state.v.data_mut();
        for (i, &gi) in g.data().iter().enumerate() {
            let si = corrected(gi);
            let m_in = if first_uses_s { si } else { gi };
            let v_in = if second_uses_s { si } else { gi };
            m[i] = beta1_t * m[i] + (one - beta1_t) * m_in;
            v[i] = match family {
                Family::AdaBelief => {
                    let d = v_in - m[i];
                    beta2 * v[i] + (one - beta2) * d * d
                }
                _ => beta2 * v[i] + (one - beta2) * v_in * v_in,
            };
        }
    }

    let alpha = hp.alpha;
    let eps = hp.epsilon;
    let bc1 = one - powi(hp.beta1, t);
    let bc2 = one - powi(beta2, t);
    let m = state.m.data();
    let v = state.v.data();
    let mut rectified = None;
    let mut update = vec![T::zero(); g.len()];

    match family {
        Family::Adam | Family::AdaBelief => {
            for (i, p) in params.data_mut().iter_mut().enumerate() {
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                let old = *p;
                *p = old - alpha * m_hat / (v_hat.sqrt() + eps);
                update[i] = *p - old;
            }
        }
        Family::DiffGrad => {
            let prev = state.prev_grad.data_mut();
            for (i, p) in params.data_mut().iter_mut().enumerate() {
                let xi = sigmoid((g.data()[i] - prev[i]).abs());
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                let old = *p;
                *p = old - alpha * xi * m_hat / (v_hat.sqrt() + eps);
                update[i] = *p - old;
                prev[i] = g.data()[i];
            }
        }
        Family::Radam => match radam_rectifier(beta2, t) {
            Some(rho) => {
                rectified = Some(true);
                let alpha1 = rho * alpha / bc1;
                for (i, p) in params.data_mut().iter_mut().enumerate() {
                    let old = *p;
                    *p = old - alpha1 * m[i] / (v[i].sqrt() + eps);
                    update[i] = *p - old;
                }
            }
            None => {
                rectified = Some(false);
                let alpha2 = alpha / bc1;
                for (i, p) in params.data_mut().iter_mut().enumerate() {
                    let old = *p;
                    *p = old - alpha2 * m[i];
                    update[i] = *p - old;
                }
            }
        },
    }

    Ok(StepReport {
        g_norm,
        e_after: e_new,
        correction_applied: factor.is_some(),
        effective_update: Tensor::from_vec(update, g.shape().to_vec())?,
        rectified,
    })
}
