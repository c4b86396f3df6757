//! Online convex loss sequences and cumulative regret.
//!
//! A [`LossSequence`] is a list of separable convex losses `f_1, ..., f_T`
//! together with the best fixed point in hindsight,
//! `theta* = argmin sum_t f_t(theta)`. The harness plays an optimizer
//! against the sequence (suffer `f_t` at the current iterate, then step on its
//! gradient) and reports `R(t) = sum_{s<=t} f_s(theta_s) - f_s(theta*)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::optim::Optimizer;
use crate::rng::rng_from;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Grid spacing used when no closed-form minimizer exists.
pub const GRID_RESOLUTION: f64 = 1e-4;

/// A separable convex loss over `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexLoss<T> {
    /// `0.5 * sum_i w_i (theta_i - c_i)^2`
    Quadratic { weights: Vec<T>, center: Vec<T> },
    /// `sum_i w_i |theta_i - c_i|`
    Absolute { weights: Vec<T>, center: Vec<T> },
}

impl<T: Scalar> ConvexLoss<T> {
    pub fn quadratic(weights: Vec<T>, center: Vec<T>) -> Self {
        assert_eq!(weights.len(), center.len());
        ConvexLoss::Quadratic { weights, center }
    }

    pub fn absolute(weights: Vec<T>, center: Vec<T>) -> Self {
        assert_eq!(weights.len(), center.len());
        ConvexLoss::Absolute { weights, center }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexLoss::Quadratic { center, .. } | ConvexLoss::Absolute { center, .. } => {
                center.len()
            }
        }
    }

    fn parts(&self) -> (&[T], &[T]) {
        match self {
            ConvexLoss::Quadratic { weights, center }
            | ConvexLoss::Absolute { weights, center } => (weights, center),
        }
    }

    /// Contribution of coordinate `i` at value `x`.
    fn coordinate_value(&self, i: usize, x: T) -> T {
        let (w, c) = self.parts();
        let d = x - c[i];
        match self {
            ConvexLoss::Quadratic { .. } => T::lit(0.5) * w[i] * d * d,
            ConvexLoss::Absolute { .. } => w[i] * d.abs(),
        }
    }

    pub fn value(&self, theta: &[T]) -> T {
        (0..self.dim()).fold(T::zero(), |acc, i| acc + self.coordinate_value(i, theta[i]))
    }

    /// Value and (sub)gradient. The absolute loss uses `sign(0) = 0`.
    pub fn value_and_gradient(&self, theta: &Tensor<T>) -> Result<(T, Tensor<T>)> {
        if theta.shape() != [self.dim()] {
            return Err(Error::ShapeMismatch {
                left: theta.shape().to_vec(),
                right: vec![self.dim()],
            });
        }
        let x = theta.data();
        let (w, c) = self.parts();
        let grad = match self {
            ConvexLoss::Quadratic { .. } => (0..self.dim()).map(|i| w[i] * (x[i] - c[i])).collect(),
            ConvexLoss::Absolute { .. } => (0..self.dim())
                .map(|i| {
                    let d = x[i] - c[i];
                    if d == T::zero() {
                        T::zero()
                    } else {
                        w[i] * d.signum()
                    }
                })
                .collect(),
        };
        Ok((self.value(x), Tensor::vector(grad)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SequenceGenerator {
    /// Quadratics whose centers jitter around a fixed hidden mean.
    DriftingQuadratics,
    /// Weighted absolute losses with jittering centers.
    AbsoluteLosses,
}

impl SequenceGenerator {
    pub fn name(self) -> &'static str {
        match self {
            SequenceGenerator::DriftingQuadratics => "drifting-quadratics",
            SequenceGenerator::AbsoluteLosses => "absolute-losses",
        }
    }
}

impl fmt::Display for SequenceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SequenceGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "drifting-quadratics" | "quadratics" | "quadratic" => {
                Ok(SequenceGenerator::DriftingQuadratics)
            }
            "absolute-losses" | "absolute" => Ok(SequenceGenerator::AbsoluteLosses),
            other => Err(Error::InvalidArgument(format!(
                "unknown sequence generator `{other}`"
            ))),
        }
    }
}

/// Dimension of generated sequences.
pub const SEQUENCE_DIM: usize = 2;
/// Standard deviation of the per-step center jitter.
pub const CENTER_JITTER: f64 = 0.5;

/// Generates `horizon` losses. Loss `t` depends only on `(seed, t)`, so a
/// shorter horizon yields a prefix of a longer one.
pub fn convex_sequence<T: Scalar>(
    generator: SequenceGenerator,
    horizon: usize,
    seed: u64,
) -> Result<LossSequence<T>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument(
            "sequence horizon must be >= 1".into(),
        ));
    }
    let mut base = rng_from(seed, 0);
    let mean: Vec<f64> = (0..SEQUENCE_DIM)
        .map(|_| base.random_range(-1.0..1.0))
        .collect();
    let losses = (1..=horizon as u64)
        .map(|t| {
            let mut rng = rng_from(seed, t);
            let weights: Vec<T> = (0..SEQUENCE_DIM)
                .map(|_| T::lit(rng.random_range(0.5..1.5)))
                .collect();
            let center: Vec<T> = mean
                .iter()
                .map(|&mu| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    T::lit(mu + CENTER_JITTER * z)
                })
                .collect();
            match generator {
                SequenceGenerator::DriftingQuadratics => ConvexLoss::quadratic(weights, center),
                SequenceGenerator::AbsoluteLosses => ConvexLoss::absolute(weights, center),
            }
        })
        .collect();
    LossSequence::new(losses)
}

#[derive(Debug, Clone)]
pub struct LossSequence<T> {
    losses: Vec<ConvexLoss<T>>,
    theta_star: Tensor<T>,
}

impl<T: Scalar> LossSequence<T> {
    /// Builds a sequence and computes its best fixed point.
    pub fn new(losses: Vec<ConvexLoss<T>>) -> Result<Self> {
        let dim = losses.first().ok_or(Error::Empty("loss sequence"))?.dim();
        if dim == 0 || losses.iter().any(|l| l.dim() != dim) {
            return Err(Error::InvalidArgument(
                "losses must share a positive dimension".into(),
            ));
        }
        let theta_star = Tensor::vector((0..dim).map(|i| coordinate_argmin(&losses, i)).collect());
        Ok(Self { losses, theta_star })
    }

    pub fn repeated(loss: ConvexLoss<T>, horizon: usize) -> Result<Self> {
        Self::new(vec![loss; horizon])
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    pub fn dim(&self) -> usize {
        self.theta_star.len()
    }

    pub fn theta_star(&self) -> &Tensor<T> {
        &self.theta_star
    }

    pub fn losses(&self) -> &[ConvexLoss<T>] {
        &self.losses
    }

    /// Loss `t` (1-based) at `theta`.
    pub fn loss_at(&self, t: usize, theta: &Tensor<T>) -> Result<(T, Tensor<T>)> {
        let loss = t
            .checked_sub(1)
            .and_then(|i| self.losses.get(i))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("step {t} outside 1..={}", self.horizon()))
            })?;
        loss.value_and_gradient(theta)
    }

    /// The first `horizon` losses, with their own best fixed point.
    pub fn prefix(&self, horizon: usize) -> Result<Self> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::InvalidArgument(format!(
                "prefix {horizon} outside 1..={}",
                self.horizon()
            )));
        }
        Self::new(self.losses[..horizon].to_vec())
    }

    /// `sum_t f_t(theta*)`.
    pub fn best_fixed_total(&self) -> T {
        let x = self.theta_star.data();
        self.losses
            .iter()
            .fold(T::zero(), |acc, l| acc + l.value(x))
    }
}

/// Minimizer of `sum_t f_t` along coordinate `i`: closed form for
/// quadratics, weighted median for absolute losses, dense grid otherwise.
fn coordinate_argmin<T: Scalar>(losses: &[ConvexLoss<T>], i: usize) -> T {
    if losses
        .iter()
        .all(|l| matches!(l, ConvexLoss::Quadratic { .. }))
    {
        // offsets from the first centre, so identical centres come back exactly
        let origin = losses[0].parts().1[i];
        let (num, den) = losses.iter().fold((T::zero(), T::zero()), |(n, d), l| {
            let (w, c) = l.parts();
            (n + w[i] * (c[i] - origin), d + w[i])
        });
        return origin + num / den;
    }
    if losses
        .iter()
        .all(|l| matches!(l, ConvexLoss::Absolute { .. }))
    {
        let points: Vec<(T, T)> = losses
            .iter()
            .map(|l| {
                let (w, c) = l.parts();
                (c[i], w[i])
            })
            .collect();
        return weighted_median(points);
    }
    grid_argmin(losses, i)
}

fn weighted_median<T: Scalar>(mut points: Vec<(T, T)>) -> T {
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite centers"));
    let total = points.iter().fold(T::zero(), |acc, p| acc + p.1);
    let half = T::lit(0.5) * total;
    let mut cumulative = T::zero();
    for (k, &(c, w)) in points.iter().enumerate() {
        cumulative += w;
        if cumulative > half {
            return c;
        }
        if cumulative == half {
            // every point of [c_k, c_{k+1}] is optimal
            let next = points.get(k + 1).map_or(c, |p| p.0);
            return T::lit(0.5) * (c + next);
        }
    }
    points.last().expect("non-empty").0
}

fn grid_argmin<T: Scalar>(losses: &[ConvexLoss<T>], i: usize) -> T {
    let centers = losses.iter().map(|l| l.parts().1[i].as_f64());
    let (lo, hi) = centers.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
        (a.min(c), b.max(c))
    });
    let steps = ((hi - lo) / GRID_RESOLUTION).ceil() as usize;
    let objective = |x: T| {
        losses
            .iter()
            .fold(T::zero(), |acc, l| acc + l.coordinate_value(i, x))
    };
    (0..=steps)
        .map(|k| T::lit(lo + k as f64 * GRID_RESOLUTION))
        .map(|x| (x, objective(x)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite objective"))
        .expect("non-empty grid")
        .0
}

/// Step size used at online step `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepSchedule {
    Constant,
    /// `alpha_t = alpha / sqrt(t)`.
    #[default]
    InverseSqrt,
}

impl StepSchedule {
    pub fn alpha_at<T: Scalar>(self, alpha: T, t: usize) -> T {
        match self {
            StepSchedule::Constant => alpha,
            StepSchedule::InverseSqrt => alpha / T::lit(t as f64).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StepSchedule::Constant => "constant",
            StepSchedule::InverseSqrt => "inverse-sqrt",
        }
    }
}

impl FromStr for StepSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "constant" => Ok(StepSchedule::Constant),
            "inverse-sqrt" | "inv-sqrt" | "sqrt" => Ok(StepSchedule::InverseSqrt),
            other => Err(Error::InvalidArgument(format!(
                "unknown step schedule `{other}`"
            ))),
        }
    }
}

/// Plays `optimizer` from `start` against every loss of `sequence` and
/// returns the suffered losses `f_t(theta_t)`.
pub fn play<T: Scalar>(
    sequence: &LossSequence<T>,
    optimizer: &mut Optimizer<T>,
    start: &Tensor<T>,
    schedule: StepSchedule,
) -> Result<Vec<T>> {
    if optimizer.steps() != 0 {
        return Err(Error::InvalidArgument(
            "regret harness needs a fresh optimizer".into(),
        ));
    }
    let base_alpha = optimizer.learning_rate();
    let mut params = vec![start.clone()];
    let mut suffered = Vec::with_capacity(sequence.horizon());
    for t in 1..=sequence.horizon() {
        let (loss, grad) = sequence.loss_at(t, &params[0])?;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "loss",
                step: t as u64,
            });
        }
        suffered.push(loss);
        optimizer.set_learning_rate(schedule.alpha_at(base_alpha, t));
        optimizer.step(&mut params, std::slice::from_ref(&grad))?;
    }
    optimizer.set_learning_rate(base_alpha);
    Ok(suffered)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretPoint<T> {
    pub t: usize,
    pub regret: T,
    pub average: T,
}

/// Cumulative regret against the sequence's own best fixed point, for every
/// `t` in `1..=T`.
pub fn regret<T: Scalar>(
    sequence: &LossSequence<T>,
    optimizer: &mut Optimizer<T>,
    start: &Tensor<T>,
    schedule: StepSchedule,
) -> Result<Vec<RegretPoint<T>>> {
    let suffered = play(sequence, optimizer, start, schedule)?;
    let star = sequence.theta_star().data();
    let mut total = T::zero();
    Ok(suffered
        .iter()
        .zip(sequence.losses())
        .enumerate()
        .map(|(k, (&f, loss))| {
            total += f - loss.value(star);
            let t = k + 1;
            RegretPoint {
                t,
                regret: total,
                average: total / T::lit(t as f64),
            }
        })
        .collect())
}

/// `R(H)` for each horizon `H`, each measured against the best fixed point
/// of the first `H` losses. `suffered` comes from [`play`] on `sequence`.
pub fn regret_at_horizons<T: Scalar>(
    sequence: &LossSequence<T>,
    suffered: &[T],
    horizons: &[usize],
) -> Result<Vec<(usize, T)>> {
    horizons
        .iter()
        .map(|&h| {
            if h > suffered.len() {
                return Err(Error::InvalidArgument(format!(
                    "horizon {h} exceeds {} played steps",
                    suffered.len()
                )));
            }
            let prefix = sequence.prefix(h)?;
            let played = suffered[..h].iter().fold(T::zero(), |acc, &f| acc + f);
            Ok((h, played - prefix.best_fixed_total()))
        })
        .collect()
}

/// Least-squares fit of `R(T) ~ c * sqrt(T)` (no intercept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtFit {
    pub c: f64,
    /// `1 - SS_res / SS_tot`, with `SS_tot` taken about the mean of `R`.
    pub r_squared: f64,
}

pub fn fit_sqrt(points: &[(usize, f64)]) -> Result<SqrtFit> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points to fit".into(),
        ));
    }
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(t, r)| {
        let x = (t as f64).sqrt();
        (sxy + x * r, sxx + x * x)
    });
    let c = sxy / sxx;
    let mean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points
        .iter()
        .map(|&(t, r)| (r - c * (t as f64).sqrt()).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|&(_, r)| (r - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        f64::NAN
    };
    Ok(SqrtFit { c, r_squared })
}
