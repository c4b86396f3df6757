//! One-dimensional curvatures with distinct gradient regimes.
//!
//! Each function is piecewise quadratic/linear with continuous first
//! derivative, so central differences are exact away from the joins.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::{check_dim, Problem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// Steep descent into a long, nearly flat plateau.
    Flat,
    /// Steep linear ramp feeding a wide basin.
    Steep,
    /// Narrow parabolic valley with linear walls.
    Valley,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [
        ScenarioKind::Flat,
        ScenarioKind::Steep,
        ScenarioKind::Valley,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Flat => "s1-flat",
            ScenarioKind::Steep => "s2-steep",
            ScenarioKind::Valley => "s3-valley",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "s1" | "s1-flat" | "flat" => Ok(ScenarioKind::Flat),
            "s2" | "s2-steep" | "steep" => Ok(ScenarioKind::Steep),
            "s3" | "s3-valley" | "valley" => Ok(ScenarioKind::Valley),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario `{other}`"
            ))),
        }
    }
}

// Plateau [-PLATEAU, PLATEAU] with slope PLATEAU_SLOPE, curvature 10 on the
// right wall and 1 on the left.
const PLATEAU: f64 = 2.0;
const PLATEAU_SLOPE: f64 = 5e-4;
const FLAT_RIGHT_CURVATURE: f64 = 10.0;
const FLAT_LEFT_CURVATURE: f64 = 1.0;

const RAMP_SLOPE: f64 = 10.0;

const VALLEY_HALF_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    kind: ScenarioKind,
}

pub fn scenario_curvature(kind: ScenarioKind) -> Scenario {
    Scenario { kind }
}

impl Scenario {
    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    /// Loss and derivative at a scalar point.
    pub fn value_and_slope<T: Scalar>(&self, x: T) -> (T, T) {
        let half = T::lit(0.5);
        match self.kind {
            ScenarioKind::Flat => {
                let s0 = T::lit(PLATEAU_SLOPE);
                let edge = T::lit(PLATEAU);
                if x > edge {
                    let k = T::lit(FLAT_RIGHT_CURVATURE);
                    let d = x - edge;
                    (s0 * x + half * k * d * d, s0 + k * d)
                } else if x < -edge {
                    let k = T::lit(FLAT_LEFT_CURVATURE);
                    let d = x + edge;
                    (s0 * x + half * k * d * d, s0 + k * d)
                } else {
                    (s0 * x, s0)
                }
            }
            ScenarioKind::Steep => {
                let k = T::lit(RAMP_SLOPE);
                if x >= T::zero() {
                    (k * x, k)
                } else {
                    // 5 (x + 1)^2 - 5, slope 10 (x + 1)
                    let d = x + T::one();
                    (half * k * d * d - half * k, k * d)
                }
            }
            ScenarioKind::Valley => {
                let w = T::lit(VALLEY_HALF_WIDTH);
                if x.abs() <= w {
                    (half * x * x / w, x / w)
                } else {
                    (x.abs() - half * w, x.signum())
                }
            }
        }
    }

    /// Interval over which the flat plateau's slope magnitude is `<= 1e-3`.
    pub fn plateau() -> (f64, f64) {
        (-PLATEAU, PLATEAU)
    }
}

impl<T: Scalar> Problem<T> for Scenario {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &Tensor<T>) -> Result<(T, Tensor<T>)> {
        check_dim(x, 1)?;
        let (f, g) = self.value_and_slope(x.data()[0]);
        Ok((f, Tensor::scalar(g)))
    }

    fn optimum(&self) -> Option<(Tensor<T>, T)> {
        let x = match self.kind {
            ScenarioKind::Flat => -PLATEAU - PLATEAU_SLOPE / FLAT_LEFT_CURVATURE,
            ScenarioKind::Steep => -1.0,
            ScenarioKind::Valley => 0.0,
        };
        let (f, _) = self.value_and_slope(T::lit(x));
        Some((Tensor::scalar(T::lit(x)), f))
    }

    fn start_point(&self) -> Tensor<T> {
        let x = match self.kind {
            ScenarioKind::Flat | ScenarioKind::Steep => 3.0,
            ScenarioKind::Valley => 1.0,
        };
        Tensor::scalar(T::lit(x))
    }
}
