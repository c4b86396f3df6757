//! Historical gradient-norm correction.
//!
//! The history `e` is an exponential moving average of gradient L2 norms,
//! `e_t = gamma * e_{t-1} + (1 - gamma) * ||g_t||`, started at zero and not
//! bias-corrected. Whenever the updated history exceeds the current norm the
//! gradient is rescaled to have norm `e_t`; otherwise it passes through
//! unchanged. The comparison uses `e_t`, which already contains `||g_t||`.

use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Result of correcting one gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Correction<T> {
    pub s: Tensor<T>,
    pub g_norm: T,
    pub e_new: T,
    pub applied: bool,
}

/// One step of the norm history recurrence.
#[inline]
pub fn update_history<T: Scalar>(e_prev: T, gamma: T, g_norm: T) -> T {
    gamma * e_prev + (T::one() - gamma) * g_norm
}

/// Scale factor `e / g_norm` when the correction fires, `None` otherwise.
///
/// A zero gradient never fires, so no division by zero can happen.
#[inline]
pub fn correction_factor<T: Scalar>(e_new: T, g_norm: T) -> Option<T> {
    (g_norm > T::zero() && e_new > g_norm).then(|| e_new / g_norm)
}

/// Corrects `g` against the history `e_prev`.
///
/// `g_norm_override` replaces `||g||` in both the recurrence and the
/// comparison; the multi-tensor stepper uses it to share one history across
/// all tensors.
pub fn adanorm_correct<T: Scalar>(
    g: &Tensor<T>,
    e_prev: T,
    gamma: T,
    g_norm_override: Option<T>,
) -> Correction<T> {
    let g_norm = g_norm_override.unwrap_or_else(|| g.l2_norm());
    let e_new = update_history(e_prev, gamma, g_norm);
    match correction_factor(e_new, g_norm) {
        Some(factor) => Correction {
            s: g.scale(factor),
            g_norm,
            e_new,
            applied: true,
        },
        None => Correction {
            s: g.clone(),
            g_norm,
            e_new,
            applied: false,
        },
    }
}
