//! Scoring functions for interval and point reports.
//!
//! Every score is a closed-form function of `(report, y)`. Point reports are
//! degenerate intervals `[x, x]`; the quantile, elementary quantile and
//! `k`-zero-one scores read the lower endpoint, the `c`-zero-one score reads
//! the midpoint.

mod expected;
mod monotone;

pub use expected::{expected_score, sample_mean};
pub use monotone::MonotoneFunction;

use serde::{Deserialize, Serialize};

use crate::error::{check_level, Error, Result};
use crate::functionals::Interval;

/// Step in `theta` with the midpoint convention: `1{theta < x} + 1{theta = x} / 2`.
fn heaviside(theta: f64, x: f64) -> f64 {
    if theta < x {
        1.0
    } else if theta == x {
        0.5
    } else {
        0.0
    }
}

fn below(y: f64, x: f64) -> f64 {
    if y <= x {
        1.0
    } else {
        0.0
    }
}

/// `(1{y <= x} - alpha) (g(x) - g(y))`.
pub fn quantile_score(g: &MonotoneFunction, alpha: f64, x: f64, y: f64) -> f64 {
    (below(y, x) - alpha) * (g.value(x) - g.value(y))
}

/// General consistent score for the equal-tailed interval:
/// `w1 (1{y <= a} - alpha/2)(g1(a) - g1(y)) + w2 (1{y <= b} - (1 - alpha/2))(g2(b) - g2(y))`.
pub fn eti_score(
    alpha: f64,
    w1: f64,
    w2: f64,
    g1: &MonotoneFunction,
    g2: &MonotoneFunction,
    i: &Interval,
    y: f64,
) -> f64 {
    w1 * quantile_score(g1, alpha / 2.0, i.lower(), y)
        + w2 * quantile_score(g2, 1.0 - alpha / 2.0, i.upper(), y)
}

/// Winkler interval score `(b - a) + (2/alpha)(a - y)1{y < a} + (2/alpha)(y - b)1{y > b}`.
pub fn winkler_is(alpha: f64, i: &Interval, y: f64) -> f64 {
    let (length, penalty) = is_decomposition(alpha, i, y);
    length + penalty
}

/// Splits the Winkler score into `(length, penalty)`.
pub fn is_decomposition(alpha: f64, i: &Interval, y: f64) -> (f64, f64) {
    let (a, b) = (i.lower(), i.upper());
    let penalty = if y < a {
        2.0 / alpha * (a - y)
    } else if y > b {
        2.0 / alpha * (y - b)
    } else {
        0.0
    };
    (b - a, penalty)
}

/// `(1{y <= x} - alpha)(H(x - theta) - H(y - theta))` with `H(0) = 1/2`.
pub fn elementary_quantile_score(alpha: f64, theta: f64, x: f64, y: f64) -> f64 {
    (below(y, x) - alpha) * (heaviside(theta, x) - heaviside(theta, y))
}

/// Sum of the elementary quantile scores at level `alpha/2`, location
/// `theta` for the lower endpoint and level `1 - alpha/2`, location `-theta`
/// for the upper endpoint.
pub fn elementary_symmetric_score(alpha: f64, theta: f64, i: &Interval, y: f64) -> f64 {
    elementary_quantile_score(alpha / 2.0, theta, i.lower(), y)
        + elementary_quantile_score(1.0 - alpha / 2.0, -theta, i.upper(), y)
}

pub fn mixture_eti_score(measure: &StepMeasure, alpha: f64, i: &Interval, y: f64) -> f64 {
    measure
        .atoms()
        .iter()
        .map(|&[theta, mass]| mass * elementary_symmetric_score(alpha, theta, i, y))
        .sum()
}

/// `-1{x <= y <= x + k}`.
pub fn k_zero_one(k: u64, x: f64, y: f64) -> f64 {
    if x <= y && y <= x + k as f64 {
        -1.0
    } else {
        0.0
    }
}

/// `-1{x - c <= y <= x + c}`.
pub fn c_zero_one(c: f64, x: f64, y: f64) -> f64 {
    if x - c <= y && y <= x + c {
        -1.0
    } else {
        0.0
    }
}

/// Finite measure made of point masses; serialized as `{"atoms": [[theta, mass], ...]}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "StepMeasureRaw")]
pub struct StepMeasure {
    atoms: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
struct StepMeasureRaw {
    atoms: Vec<[f64; 2]>,
}

impl TryFrom<StepMeasureRaw> for StepMeasure {
    type Error = Error;

    fn try_from(raw: StepMeasureRaw) -> Result<Self> {
        StepMeasure::new(raw.atoms)
    }
}

impl StepMeasure {
    /// Atoms as `[location, mass]`; locations strictly ascending, masses positive.
    pub fn new(atoms: Vec<[f64; 2]>) -> Result<Self> {
        if atoms.windows(2).any(|w| w[0][0] >= w[1][0]) {
            return Err(Error::InvalidScore(
                "measure locations must be strictly ascending".into(),
            ));
        }
        if atoms
            .iter()
            .any(|a| !a[0].is_finite() || !(a[1] > 0.0 && a[1].is_finite()))
        {
            return Err(Error::InvalidScore(
                "measure atoms need finite locations and positive masses".into(),
            ));
        }
        Ok(StepMeasure { atoms })
    }

    pub fn atoms(&self) -> &[[f64; 2]] {
        &self.atoms
    }

    /// Mixing measure of a symmetric step-function ETI score: one atom at
    /// every jump of `g1`, carrying `w1` times the jump size.
    pub fn from_step_score(w1: f64, g1: &MonotoneFunction) -> Result<Self> {
        let MonotoneFunction::Step { jumps, .. } = g1 else {
            return Err(Error::InvalidScore("g1 must be a step function".into()));
        };
        if w1 == 0.0 {
            return Ok(StepMeasure::default());
        }
        StepMeasure::new(jumps.iter().map(|&[loc, size]| [loc, w1 * size]).collect())
    }
}

/// The `g2` making the ETI score symmetric for a step `g1`:
/// `w2 g2(x) = -w1 g1(-x)`.
pub fn symmetric_partner(w1: f64, w2: f64, g1: &MonotoneFunction) -> Result<MonotoneFunction> {
    let MonotoneFunction::Step { jumps, base } = g1 else {
        return Err(Error::InvalidScore("g1 must be a step function".into()));
    };
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::InvalidScore("weights must be positive".into()));
    }
    let r = w1 / w2;
    let total: f64 = jumps.iter().map(|j| j[1]).sum();
    let mirrored = jumps
        .iter()
        .rev()
        .map(|&[loc, size]| [-loc, r * size])
        .collect();
    MonotoneFunction::step(mirrored, -r * (base + total))
}

/// A named, parameterized scoring function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "score", rename_all = "snake_case")]
pub enum ScoreSpec {
    Quantile {
        alpha: f64,
        #[serde(default = "MonotoneFunction::identity")]
        g: MonotoneFunction,
    },
    EtiFamily {
        alpha: f64,
        w1: f64,
        w2: f64,
        g1: MonotoneFunction,
        g2: MonotoneFunction,
    },
    Winkler {
        alpha: f64,
    },
    ElementaryQuantile {
        alpha: f64,
        theta: f64,
    },
    ElementarySymmetric {
        alpha: f64,
        theta: f64,
    },
    Mixture {
        alpha: f64,
        measure: StepMeasure,
    },
    K01 {
        k: u64,
    },
    C01 {
        c: f64,
    },
}

impl ScoreSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ScoreSpec::Quantile { alpha, .. }
            | ScoreSpec::Winkler { alpha }
            | ScoreSpec::Mixture { alpha, .. } => check_level("alpha", *alpha),
            ScoreSpec::EtiFamily { alpha, w1, w2, .. } => {
                check_level("alpha", *alpha)?;
                if !(*w1 >= 0.0 && *w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
                    return Err(Error::InvalidScore(
                        "weights must be finite and >= 0".into(),
                    ));
                }
                Ok(())
            }
            ScoreSpec::ElementaryQuantile { alpha, theta } => {
                check_level("alpha", *alpha)?;
                finite("theta", *theta)
            }
            ScoreSpec::ElementarySymmetric { alpha, theta } => {
                check_level("alpha", *alpha)?;
                finite("theta", *theta)?;
                if *theta < 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "theta",
                        value: *theta,
                        reason: "must be >= 0",
                    });
                }
                Ok(())
            }
            ScoreSpec::K01 { .. } => Ok(()),
            ScoreSpec::C01 { c } => crate::error::check_positive("c", *c),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScoreSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScoreSpec::Quantile { .. } => "quantile",
            ScoreSpec::EtiFamily { .. } => "eti_family",
            ScoreSpec::Winkler { .. } => "winkler",
            ScoreSpec::ElementaryQuantile { .. } => "elementary_quantile",
            ScoreSpec::ElementarySymmetric { .. } => "elementary_symmetric",
            ScoreSpec::Mixture { .. } => "mixture",
            ScoreSpec::K01 { .. } => "k01",
            ScoreSpec::C01 { .. } => "c01",
        }
    }

    /// True for scores of point reports.
    pub fn is_point_score(&self) -> bool {
        matches!(
            self,
            ScoreSpec::Quantile { .. }
                | ScoreSpec::ElementaryQuantile { .. }
                | ScoreSpec::K01 { .. }
                | ScoreSpec::C01 { .. }
        )
    }

    /// Whether the ETI family parameters meet the strict consistency
    /// conditions (positive weights, strictly increasing `g1`, `g2`).
    /// Other kinds return `None`.
    pub fn eti_strict(&self) -> Option<bool> {
        match self {
            ScoreSpec::EtiFamily { w1, w2, g1, g2, .. } => Some(
                *w1 > 0.0
                    && *w2 > 0.0
                    && g1.is_strictly_increasing()
                    && g2.is_strictly_increasing(),
            ),
            _ => None,
        }
    }

    pub fn evaluate(&self, report: &Interval, y: f64) -> f64 {
        match self {
            ScoreSpec::Quantile { alpha, g } => quantile_score(g, *alpha, report.lower(), y),
            ScoreSpec::EtiFamily {
                alpha,
                w1,
                w2,
                g1,
                g2,
            } => eti_score(*alpha, *w1, *w2, g1, g2, report, y),
            ScoreSpec::Winkler { alpha } => winkler_is(*alpha, report, y),
            ScoreSpec::ElementaryQuantile { alpha, theta } => {
                elementary_quantile_score(*alpha, *theta, report.lower(), y)
            }
            ScoreSpec::ElementarySymmetric { alpha, theta } => {
                elementary_symmetric_score(*alpha, *theta, report, y)
            }
            ScoreSpec::Mixture { alpha, measure } => mixture_eti_score(measure, *alpha, report, y),
            ScoreSpec::K01 { k } => k_zero_one(*k, report.lower(), y),
            ScoreSpec::C01 { c } => c_zero_one(*c, report.midpoint(), y),
        }
    }

    /// Observation values where `y -> S(report, y)` may fail to be a
    /// polynomial. Between consecutive kinks the score is a polynomial of
    /// degree at most three.
    pub fn kinks(&self, report: &Interval) -> Vec<f64> {
        let (a, b) = (report.lower(), report.upper());
        let mut out = match self {
            ScoreSpec::Quantile { g, .. } => {
                let mut v = g.kinks();
                v.push(a);
                v
            }
            ScoreSpec::EtiFamily { g1, g2, .. } => {
                let mut v = g1.kinks();
                v.extend(g2.kinks());
                v.extend([a, b]);
                v
            }
            ScoreSpec::Winkler { .. } => vec![a, b],
            ScoreSpec::ElementaryQuantile { theta, .. } => vec![a, *theta],
            ScoreSpec::ElementarySymmetric { theta, .. } => vec![a, b, *theta, -theta],
            ScoreSpec::Mixture { measure, .. } => {
                let mut v: Vec<f64> = measure.atoms().iter().flat_map(|t| [t[0], -t[0]]).collect();
                v.extend([a, b]);
                v
            }
            ScoreSpec::K01 { k } => vec![a, a + *k as f64],
            ScoreSpec::C01 { c } => vec![report.midpoint() - c, report.midpoint() + c],
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
