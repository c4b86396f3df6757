use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which moment estimate(s) consume the norm-corrected gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormTarget {
    /// `m` uses the corrected gradient, `v` the raw one.
    #[default]
    FirstMoment,
    /// `m` uses the raw gradient, `v` the corrected one.
    SecondMoment,
    BothMoments,
}

impl NormTarget {
    pub const ALL: [NormTarget; 3] = [
        NormTarget::FirstMoment,
        NormTarget::SecondMoment,
        NormTarget::BothMoments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NormTarget::FirstMoment => "first",
            NormTarget::SecondMoment => "second",
            NormTarget::BothMoments => "both",
        }
    }
}

impl fmt::Display for NormTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "first" | "first-moment" | "firstmoment" | "m" => Ok(NormTarget::FirstMoment),
            "second" | "second-moment" | "secondmoment" | "v" => Ok(NormTarget::SecondMoment),
            "both" | "both-moments" | "bothmoments" => Ok(NormTarget::BothMoments),
            other => Err(Error::InvalidArgument(format!(
                "unknown norm target `{other}`"
            ))),
        }
    }
}

/// Whether one gradient-norm history is kept per parameter tensor or one for
/// the concatenation of all gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NormScope {
    #[default]
    PerTensor,
    Global,
}

impl NormScope {
    pub fn as_str(self) -> &'static str {
        match self {
            NormScope::PerTensor => "per-tensor",
            NormScope::Global => "global",
        }
    }
}

impl fmt::Display for NormScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "per-tensor" | "pertensor" | "tensor" => Ok(NormScope::PerTensor),
            "global" => Ok(NormScope::Global),
            other => Err(Error::InvalidArgument(format!(
                "unknown norm scope `{other}`"
            ))),
        }
    }
}

/// Hyperparameters shared by all eight optimizers.
///
/// `gamma`, `norm_target` and `norm_scope` only affect the norm-corrected
/// variants (base optimizers still track the gradient-norm EMA for telemetry).
/// `beta1_decay`, when set, replaces `beta1` in the first-moment EMA by
/// `beta1 * lambda^(t-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams<T> {
    pub alpha: T,
    pub beta1: T,
    pub beta2: T,
    pub gamma: T,
    pub epsilon: T,
    pub beta1_decay: Option<T>,
    pub norm_target: NormTarget,
    pub norm_scope: NormScope,
}

impl<T: Scalar> Default for HyperParams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(0.001),
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            gamma: T::lit(0.95),
            epsilon: T::lit(1e-8),
            beta1_decay: None,
            norm_target: NormTarget::FirstMoment,
            norm_scope: NormScope::PerTensor,
        }
    }
}

impl<T: Scalar> HyperParams<T> {
    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_betas(mut self, beta1: T, beta2: T) -> Self {
        self.beta1 = beta1;
        self.beta2 = beta2;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_beta1_decay(mut self, lambda: T) -> Self {
        self.beta1_decay = Some(lambda);
        self
    }

    pub fn with_norm_target(mut self, target: NormTarget) -> Self {
        self.norm_target = target;
        self
    }

    pub fn with_norm_scope(mut self, scope: NormScope) -> Self {
        self.norm_scope = scope;
        self
    }

    /// Checks ranges and the `beta1^2 / sqrt(beta2) < 1` condition of the
    /// regret bound.
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let bad = |name, reason: String| Err(Error::InvalidHyperParam { name, reason });
        if !self.alpha.is_finite() || self.alpha < zero {
            return bad(
                "alpha",
                format!("must be finite and >= 0, got {}", self.alpha),
            );
        }
        for (name, value) in [
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("gamma", self.gamma),
        ] {
            if !(value >= zero && value < one) {
                return bad(name, format!("must lie in [0, 1), got {value}"));
            }
        }
        if !self.epsilon.is_finite() || self.epsilon < zero {
            return bad(
                "epsilon",
                format!("must be finite and >= 0, got {}", self.epsilon),
            );
        }
        if let Some(lambda) = self.beta1_decay {
            if !(lambda > zero && lambda <= one) {
                return bad("beta1_decay", format!("must lie in (0, 1], got {lambda}"));
            }
        }
        if !(self.beta1 * self.beta1 < self.beta2.sqrt()) {
            return bad(
                "beta1",
                format!(
                    "beta1^2 / sqrt(beta2) must be < 1 (beta1={}, beta2={})",
                    self.beta1, self.beta2
                ),
            );
        }
        Ok(())
    }

    /// First-moment coefficient at step `t` (1-based).
    pub fn beta1_at(&self, t: u64) -> T {
        match self.beta1_decay {
            Some(lambda) => self.beta1 * powi(lambda, t.saturating_sub(1)),
            None => self.beta1,
        }
    }
}

pub(crate) fn powi<T: Scalar>(x: T, n: u64) -> T {
    x.powi(i32::try_from(n).unwrap_or(i32::MAX))
}

/// The four base optimizers and their norm-corrected counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Adam,
    AdamNorm,
    DiffGrad,
    DiffGradNorm,
    Radam,
    RadamNorm,
    AdaBelief,
    AdaBeliefNorm,
}

/// Update rule shared by a base optimizer and its norm-corrected variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Adam,
    DiffGrad,
    Radam,
    AdaBelief,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 8] = [
        OptimizerKind::Adam,
        OptimizerKind::AdamNorm,
        OptimizerKind::DiffGrad,
        OptimizerKind::DiffGradNorm,
        OptimizerKind::Radam,
        OptimizerKind::RadamNorm,
        OptimizerKind::AdaBelief,
        OptimizerKind::AdaBeliefNorm,
    ];

    pub fn family(self) -> Family {
        match self {
            OptimizerKind::Adam | OptimizerKind::AdamNorm => Family::Adam,
            OptimizerKind::DiffGrad | OptimizerKind::DiffGradNorm => Family::DiffGrad,
            OptimizerKind::Radam | OptimizerKind::RadamNorm => Family::Radam,
            OptimizerKind::AdaBelief | OptimizerKind::AdaBeliefNorm => Family::AdaBelief,
        }
    }

    pub fn is_norm_corrected(self) -> bool {
        matches!(
            self,
            OptimizerKind::AdamNorm
                | OptimizerKind::DiffGradNorm
                | OptimizerKind::RadamNorm
                | OptimizerKind::AdaBeliefNorm
        )
    }

    /// The uncorrected optimizer of the same family.
    pub fn base(self) -> OptimizerKind {
        match self.family() {
            Family::Adam => OptimizerKind::Adam,
            Family::DiffGrad => OptimizerKind::DiffGrad,
            Family::Radam => OptimizerKind::Radam,
            Family::AdaBelief => OptimizerKind::AdaBelief,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::AdamNorm => "adamnorm",
            OptimizerKind::DiffGrad => "diffgrad",
            OptimizerKind::DiffGradNorm => "diffgradnorm",
            OptimizerKind::Radam => "radam",
            OptimizerKind::RadamNorm => "radamnorm",
            OptimizerKind::AdaBelief => "adabelief",
            OptimizerKind::AdaBeliefNorm => "adabeliefnorm",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let wanted = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.name() == wanted)
            .ok_or_else(|| Error::UnknownOptimizer(s.to_string()))
    }
}
