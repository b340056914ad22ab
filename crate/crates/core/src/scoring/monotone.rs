use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-decreasing function `g` used inside quantile-type scores.
///
/// Step functions take the midpoint value `(g(x-) + g(x+)) / 2` at their
/// jump points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "MonotoneRaw")]
pub enum MonotoneFunction {
    Linear {
        slope: f64,
        intercept: f64,
    },
    /// `base + sum of size * H(x - location)` with `H(0) = 1/2`; jumps are
    /// `[location, size]` pairs.
    Step {
        jumps: Vec<[f64; 2]>,
        base: f64,
    },
    /// Linear interpolation between knots, extended linearly with the end
    /// slopes.
    PiecewiseLinear {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    /// `scale * x^3`.
    Cubic {
        scale: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum MonotoneRaw {
    Linear { slope: f64, intercept: f64 },
    Step { jumps: Vec<[f64; 2]>, base: f64 },
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    Cubic { scale: f64 },
}

impl TryFrom<MonotoneRaw> for MonotoneFunction {
    type Error = Error;

    fn try_from(raw: MonotoneRaw) -> Result<Self> {
        match raw {
            MonotoneRaw::Linear { slope, intercept } => MonotoneFunction::linear(slope, intercept),
            MonotoneRaw::Step { jumps, base } => MonotoneFunction::step(jumps, base),
            MonotoneRaw::PiecewiseLinear { knots, values } => {
                MonotoneFunction::piecewise_linear(knots, values)
            }
            MonotoneRaw::Cubic { scale } => MonotoneFunction::cubic(scale),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidScore(msg.into())
}

impl MonotoneFunction {
    pub fn identity() -> Self {
        MonotoneFunction::Linear {
            slope: 1.0,
            intercept: 0.0,
        }
    }

    pub fn linear(slope: f64, intercept: f64) -> Result<Self> {
        if !(slope >= 0.0 && slope.is_finite() && intercept.is_finite()) {
            return Err(invalid(format!(
                "linear g needs a finite slope >= 0, got {slope}"
            )));
        }
        Ok(MonotoneFunction::Linear { slope, intercept })
    }

    pub fn step(jumps: Vec<[f64; 2]>, base: f64) -> Result<Self> {
        if !base.is_finite() {
            return Err(invalid("step g needs a finite base"));
        }
        for w in jumps.windows(2) {
            if w[0][0] >= w[1][0] {
                return Err(invalid("step g jump locations must be strictly ascending"));
            }
        }
        if jumps
            .iter()
            .any(|j| !j[0].is_finite() || !(j[1] > 0.0 && j[1].is_finite()))
        {
            return Err(invalid(
                "step g needs finite locations and positive jump sizes",
            ));
        }
        Ok(MonotoneFunction::Step { jumps, base })
    }

    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(invalid(
                "piecewise-linear g needs at least two knots and one value per knot",
            ));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("piecewise-linear g needs finite knots and values"));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "piecewise-linear g knots must be strictly ascending",
            ));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("piecewise-linear g values must be non-decreasing"));
        }
        Ok(MonotoneFunction::PiecewiseLinear { knots, values })
    }

    pub fn cubic(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(invalid(format!(
                "cubic g needs a positive scale, got {scale}"
            )));
        }
        Ok(MonotoneFunction::Cubic { scale })
    }

    /// Value at `x`, with the midpoint convention at jumps.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            MonotoneFunction::Step { jumps, base } => {
                base + jumps
                    .iter()
                    .map(|&[loc, size]| {
                        if loc < x {
                            size
                        } else if loc == x {
                            0.5 * size
                        } else {
                            0.0
                        }
                    })
                    .sum::<f64>()
            }
            _ => self.continuous_value(x),
        }
    }

    pub fn left_limit(&self, x: f64) -> f64 {
        match self {
            MonotoneFunction::Step { jumps, base } => {
                base + jumps.iter().filter(|j| j[0] < x).map(|j| j[1]).sum::<f64>()
            }
            _ => self.continuous_value(x),
        }
    }

    pub fn right_limit(&self, x: f64) -> f64 {
        match self {
            MonotoneFunction::Step { jumps, base } => {
                base + jumps
                    .iter()
                    .filter(|j| j[0] <= x)
                    .map(|j| j[1])
                    .sum::<f64>()
            }
            _ => self.continuous_value(x),
        }
    }

    fn continuous_value(&self, x: f64) -> f64 {
        match self {
            MonotoneFunction::Linear { slope, intercept } => slope * x + intercept,
            MonotoneFunction::Cubic { scale } => scale * x * x * x,
            MonotoneFunction::PiecewiseLinear { knots, values } => {
                let n = knots.len();
                // index of the segment containing x, clamped to the end segments
                let i = knots.partition_point(|&k| k <= x).clamp(1, n - 1);
                let (x0, x1) = (knots[i - 1], knots[i]);
                let (y0, y1) = (values[i - 1], values[i]);
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
            MonotoneFunction::Step { .. } => unreachable!("step functions are not continuous"),
        }
    }

    pub fn is_strictly_increasing(&self) -> bool {
        match self {
            MonotoneFunction::Linear { slope, .. } => *slope > 0.0,
            MonotoneFunction::Step { .. } => false,
            MonotoneFunction::PiecewiseLinear { values, .. } => {
                values.windows(2).all(|w| w[0] < w[1])
            }
            MonotoneFunction::Cubic { .. } => true,
        }
    }

    /// Points where `g` is not a polynomial locally.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            MonotoneFunction::Step { jumps, .. } => jumps.iter().map(|j| j[0]).collect(),
            MonotoneFunction::PiecewiseLinear { knots, .. } => knots.clone(),
            MonotoneFunction::Linear { .. } | MonotoneFunction::Cubic { .. } => Vec::new(),
        }
    }
}
