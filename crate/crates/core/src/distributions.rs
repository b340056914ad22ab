//! Exact predictive laws.
//!
//! Two base kinds are supported: finite discrete laws on the nonnegative
//! integers and piecewise-uniform densities on the real line. Mixtures and
//! location-scale images are flattened back into one of the two kinds as soon
//! as they are built, so every downstream scan works on a single sorted list
//! of atoms or breakpoints.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_level, check_positive, Error, Result};
use crate::{TAU_CMP, TAU_MASS};

/// A closed real interval `[lo, hi]`, used for quantile sets and ranges of
/// lower endpoints. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct ClosedRange {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "ClosedRange lo > hi: {lo} > {hi}");
        ClosedRange { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        ClosedRange { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo - TAU_CMP && x <= self.hi + TAU_CMP
    }

    pub fn is_degenerate(&self) -> bool {
        self.hi - self.lo <= TAU_CMP
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Integers contained in the range (within tolerance).
    pub fn integers(&self) -> impl Iterator<Item = u64> {
        let lo = (self.lo - TAU_CMP).ceil().max(0.0) as u64;
        let hi = (self.hi + TAU_CMP).floor();
        let hi = if hi < 0.0 { None } else { Some(hi as u64) };
        hi.into_iter().flat_map(move |hi| lo..=hi)
    }
}

impl From<[f64; 2]> for ClosedRange {
    fn from(v: [f64; 2]) -> Self {
        ClosedRange { lo: v[0], hi: v[1] }
    }
}

impl From<ClosedRange> for [f64; 2] {
    fn from(r: ClosedRange) -> Self {
        [r.lo, r.hi]
    }
}

/// Finite discrete law on the nonnegative integers.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    support: Vec<u64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "support has {} atoms but {} probabilities were given",
                support.len(),
                probs.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "support must be strictly ascending".into(),
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "atom probabilities must be strictly positive, got {p}"
            )));
        }
        let cum = cumulative(&probs);
        check_total(cum[cum.len() - 1])?;
        Ok(DiscreteDist {
            support,
            probs,
            cum,
        })
    }

    pub fn point_mass(x: u64) -> Self {
        DiscreteDist {
            support: vec![x],
            probs: vec![1.0],
            cum: vec![1.0],
        }
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_atom(&self) -> u64 {
        self.support[0]
    }

    pub fn max_atom(&self) -> u64 {
        self.support[self.support.len() - 1]
    }

    /// Cumulative mass of the first `count` atoms.
    fn cum_before(&self, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.cum[count - 1].min(1.0)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cum_before(self.support.partition_point(|&s| s as f64 <= x))
    }

    pub fn cdf_left(&self, x: f64) -> f64 {
        self.cum_before(self.support.partition_point(|&s| (s as f64) < x))
    }

    /// Mass of the atoms in `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        let start = self.support.partition_point(|&s| (s as f64) < lo);
        let end = self.support.partition_point(|&s| s as f64 <= hi);
        self.probs[start..end].iter().sum()
    }

    pub fn quantile_set(&self, beta: f64) -> ClosedRange {
        let n = self.support.len();
        let lo = self
            .cum
            .iter()
            .position(|&c| c >= beta - TAU_CMP)
            .unwrap_or(n - 1);
        let hi = self
            .cum
            .iter()
            .position(|&c| c > beta + TAU_CMP)
            .unwrap_or(n - 1);
        ClosedRange::new(self.support[lo] as f64, self.support[hi] as f64)
    }

    fn inverse(&self, u: f64) -> f64 {
        let idx = self.cum.partition_point(|&c| c <= u);
        self.support[idx.min(self.support.len() - 1)] as f64
    }
}

/// Law with a piecewise-constant density on `breakpoints[0]..breakpoints[m]`.
///
/// Piece `i` spans `[breakpoints[i], breakpoints[i + 1]]` and carries
/// `masses[i]`, spread uniformly. Zero-mass pieces encode gaps in the support.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseUniformDist {
    breakpoints: Vec<f64>,
    masses: Vec<f64>,
    /// `cum[i]` is the CDF at `breakpoints[i]`.
    cum: Vec<f64>,
}

impl PiecewiseUniformDist {
    pub fn new(breakpoints: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidDistribution(
                "need at least two breakpoints".into(),
            ));
        }
        if masses.len() + 1 != breakpoints.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} breakpoints require {} piece masses, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                masses.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidDistribution(
                "breakpoints must be finite".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDistribution(
                "breakpoints must be strictly ascending".into(),
            ));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "piece masses must be nonnegative, got {m}"
            )));
        }
        let mut cum = Vec::with_capacity(breakpoints.len());
        cum.push(0.0);
        cum.extend(cumulative(&masses));
        check_total(cum[cum.len() - 1])?;
        Ok(PiecewiseUniformDist {
            breakpoints,
            masses,
            cum,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// CDF values at the breakpoints.
    pub fn cdf_at_breakpoints(&self) -> &[f64] {
        &self.cum
    }

    pub fn lower(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn upper(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    pub fn density(&self, piece: usize) -> f64 {
        self.masses[piece] / (self.breakpoints[piece + 1] - self.breakpoints[piece])
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if x <= b[0] {
            return 0.0;
        }
        if x >= b[b.len() - 1] {
            return self.cum[self.cum.len() - 1].min(1.0);
        }
        let i = b.partition_point(|&v| v <= x);
        let frac = (x - b[i - 1]) / (b[i] - b[i - 1]);
        (self.cum[i - 1] + self.masses[i - 1] * frac).min(1.0)
    }

    /// Smallest `x` in the support hull with `F(x) >= t`, with CDF values
    /// within `TAU_CMP` of `t` treated as equal to `t`.
    pub fn quantile_lower(&self, t: f64) -> f64 {
        let b = &self.breakpoints;
        let Some(j) = self.cum.iter().position(|&c| c >= t - TAU_CMP) else {
            return b[b.len() - 1];
        };
        if j == 0 {
            return b[0];
        }
        if (self.cum[j] - t).abs() <= TAU_CMP {
            return b[j];
        }
        let frac = (t - self.cum[j - 1]) / self.masses[j - 1];
        (b[j - 1] + frac * (b[j] - b[j - 1])).clamp(b[j - 1], b[j])
    }

    /// Largest `x` in the support hull with `F(x) <= t` (same tolerance).
    pub fn quantile_upper(&self, t: f64) -> f64 {
        let b = &self.breakpoints;
        let m = b.len() - 1;
        let Some(j) = self.cum.iter().rposition(|&c| c <= t + TAU_CMP) else {
            return b[0];
        };
        if j == m {
            return b[m];
        }
        if (self.cum[j] - t).abs() <= TAU_CMP {
            return b[j];
        }
        let frac = (t - self.cum[j]) / self.masses[j];
        (b[j] + frac * (b[j + 1] - b[j])).clamp(b[j], b[j + 1])
    }

    /// `{x in hull : F(x) = level}` for a level in `[0, 1]`.
    pub fn level_set(&self, level: f64) -> ClosedRange {
        let lo = self.quantile_lower(level);
        let hi = self.quantile_upper(level).max(lo);
        ClosedRange::new(lo, hi)
    }

    fn inverse(&self, u: f64) -> f64 {
        let j = self.cum.partition_point(|&c| c <= u);
        let m = self.breakpoints.len() - 1;
        if j == 0 {
            return self.breakpoints[0];
        }
        if j > m {
            return self.breakpoints[m];
        }
        let (lo, hi) = (self.breakpoints[j - 1], self.breakpoints[j]);
        let frac = (u - self.cum[j - 1]) / self.masses[j - 1];
        (lo + frac * (hi - lo)).clamp(lo, hi)
    }
}

/// A predictive law in normalized form.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Discrete(DiscreteDist),
    PiecewiseUniform(PiecewiseUniformDist),
}

impl From<DiscreteDist> for Distribution {
    fn from(d: DiscreteDist) -> Self {
        Distribution::Discrete(d)
    }
}

impl From<PiecewiseUniformDist> for Distribution {
    fn from(d: PiecewiseUniformDist) -> Self {
        Distribution::PiecewiseUniform(d)
    }
}

impl Distribution {
    pub fn discrete(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        DiscreteDist::new(support, probs).map(Distribution::Discrete)
    }

    pub fn piecewise_uniform(breakpoints: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        PiecewiseUniformDist::new(breakpoints, masses).map(Distribution::PiecewiseUniform)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        PiecewiseUniformDist::uniform(lo, hi).map(Distribution::PiecewiseUniform)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Distribution::Discrete(_))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.cdf(x),
            Distribution::PiecewiseUniform(p) => p.cdf(x),
        }
    }

    /// Left limit `F(x-)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.cdf_left(x),
            Distribution::PiecewiseUniform(p) => p.cdf(x),
        }
    }

    /// `F(upper) - F(lower-)`.
    pub fn coverage(&self, lower: f64, upper: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.mass_between(lower, upper),
            Distribution::PiecewiseUniform(p) => (p.cdf(upper) - p.cdf(lower)).max(0.0),
        }
    }

    /// The quantile set `{x : F(x-) <= beta <= F(x)}` as a closed interval.
    ///
    /// For discrete laws the members in the observation domain are the
    /// integers of the returned range.
    pub fn quantile_set(&self, beta: f64) -> Result<ClosedRange> {
        check_level("beta", beta)?;
        Ok(match self {
            Distribution::Discrete(d) => d.quantile_set(beta),
            Distribution::PiecewiseUniform(p) => p.level_set(beta),
        })
    }

    /// Smallest and largest point of the support.
    pub fn support_hull(&self) -> (f64, f64) {
        match self {
            Distribution::Discrete(d) => (d.min_atom() as f64, d.max_atom() as f64),
            Distribution::PiecewiseUniform(p) => (p.lower(), p.upper()),
        }
    }

    /// Finite mixture `sum_i weights[i] * components[i]`, flattened.
    pub fn mix(components: &[Distribution], weights: &[f64]) -> Result<Distribution> {
        if components.is_empty() || components.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "mixture needs matching nonempty component and weight lists ({} vs {})",
                components.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidDistribution(format!(
                "mixture weights must be positive, got {w}"
            )));
        }
        check_total(weights.iter().sum())?;
        let discrete = components[0].is_discrete();
        if components.iter().any(|c| c.is_discrete() != discrete) {
            return Err(Error::KindMismatch);
        }

        if discrete {
            let mut atoms: BTreeMap<u64, f64> = BTreeMap::new();
            for (c, &w) in components.iter().zip(weights) {
                let Distribution::Discrete(d) = c else {
                    unreachable!()
                };
                for (&s, &p) in d.support.iter().zip(&d.probs) {
                    *atoms.entry(s).or_insert(0.0) += w * p;
                }
            }
            let (support, probs) = atoms.into_iter().unzip();
            return Distribution::discrete(support, probs);
        }

        let mut grid: Vec<f64> = components
            .iter()
            .flat_map(|c| match c {
                Distribution::PiecewiseUniform(p) => p.breakpoints.clone(),
                Distribution::Discrete(_) => unreachable!(),
            })
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() <= TAU_CMP);
        let masses = grid
            .windows(2)
            .map(|w| {
                components
                    .iter()
                    .zip(weights)
                    .map(|(c, &wt)| wt * (c.cdf(w[1]) - c.cdf(w[0])))
                    .sum::<f64>()
                    .max(0.0)
            })
            .collect();
        Distribution::piecewise_uniform(grid, masses)
    }

    /// Law of `loc + scale * Y` for `Y ~ self`.
    ///
    /// Discrete laws only accept integer shifts with unit scale so that the
    /// support stays in the nonnegative integers.
    pub fn location_scale(&self, loc: f64, scale: f64) -> Result<Distribution> {
        check_positive("scale", scale)?;
        if !loc.is_finite() {
            return Err(Error::InvalidParameter {
                name: "loc",
                value: loc,
                reason: "must be finite",
            });
        }
        match self {
            Distribution::Discrete(d) => {
                if (scale - 1.0).abs() > TAU_CMP {
                    return Err(Error::InvalidParameter {
                        name: "scale",
                        value: scale,
                        reason: "discrete laws only admit unit scale",
                    });
                }
                let shift = loc.round();
                if (loc - shift).abs() > TAU_CMP {
                    return Err(Error::InvalidParameter {
                        name: "loc",
                        value: loc,
                        reason: "discrete laws only admit integer shifts",
                    });
                }
                let support = d
                    .support
                    .iter()
                    .map(|&s| {
                        let v = s as f64 + shift;
                        if v < 0.0 {
                            Err(Error::InvalidParameter {
                                name: "loc",
                                value: loc,
                                reason: "shift moves atoms below zero",
                            })
                        } else {
                            Ok(v as u64)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                Distribution::discrete(support, d.probs.clone())
            }
            Distribution::PiecewiseUniform(p) => Distribution::piecewise_uniform(
                p.breakpoints.iter().map(|&b| loc + scale * b).collect(),
                p.masses.clone(),
            ),
        }
    }

    /// Inverse-CDF sampling from a seeded ChaCha stream.
    pub fn sample(&self, seed: u64, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                reason: "sample size must be at least 1",
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n)
            .map(|_| {
                let u: f64 = rng.random();
                match self {
                    Distribution::Discrete(d) => d.inverse(u),
                    Distribution::PiecewiseUniform(p) => p.inverse(u),
                }
            })
            .collect())
    }
}

fn cumulative(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

fn check_total(total: f64) -> Result<()> {
    if (total - 1.0).abs() > TAU_MASS {
        Err(Error::InvalidDistribution(format!(
            "masses sum to {total}, expected 1"
        )))
    } else {
        Ok(())
    }
}
