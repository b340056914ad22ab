//! Set-valued interval functionals.
//!
//! Every functional returns its complete solution set. Ties are never broken:
//! two candidate lengths or coverages within [`TAU_CMP`] of each other count
//! as equal. Continuous solution sets are unions of [`IntervalFamily`]
//! values, i.e. intervals of a common length whose lower endpoint ranges over
//! a closed range.

use std::fmt;

use serde::{Deserialize, Serialize};

pub use crate::distributions::ClosedRange;
use crate::distributions::{DiscreteDist, Distribution, PiecewiseUniformDist};
use crate::error::{check_level, check_positive, Error, Result};
use crate::TAU_CMP;

/// Closed interval `[lower, upper]` with `lower <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_finite() && upper.is_finite() && lower <= upper {
            Ok(Interval { lower, upper })
        } else {
            Err(Error::InvalidInterval { lower, upper })
        }
    }

    /// Degenerate interval `[x, x]`; point reports are encoded this way.
    pub fn point(x: f64) -> Self {
        Interval { lower: x, upper: x }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn approx_eq(&self, other: &Interval) -> bool {
        (self.lower - other.lower).abs() <= TAU_CMP && (self.upper - other.upper).abs() <= TAU_CMP
    }

    /// True when both endpoints are nonnegative integers.
    pub fn is_integral(&self) -> bool {
        is_count(self.lower) && is_count(self.upper)
    }
}

fn is_count(x: f64) -> bool {
    x > -TAU_CMP && (x - x.round()).abs() <= TAU_CMP
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lower, i.upper]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower, self.upper)
    }
}

/// `{ [x, x + length] : x in lower_range }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalFamily {
    pub lower_range: ClosedRange,
    pub length: f64,
}

impl IntervalFamily {
    pub fn single(i: Interval) -> Self {
        IntervalFamily {
            lower_range: ClosedRange::point(i.lower),
            length: i.length(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.lower_range.is_degenerate()
    }

    pub fn contains(&self, i: &Interval) -> bool {
        (i.length() - self.length).abs() <= TAU_CMP && self.lower_range.contains(i.lower)
    }

    pub fn first(&self) -> Interval {
        Interval::point(self.lower_range.lo).with_length(self.length)
    }

    pub fn last(&self) -> Interval {
        Interval::point(self.lower_range.hi).with_length(self.length)
    }

    /// The two extreme members and, for a continuum, the middle one.
    pub fn representatives(&self) -> Vec<Interval> {
        if self.is_degenerate() {
            return vec![self.first()];
        }
        let mid = 0.5 * (self.lower_range.lo + self.lower_range.hi);
        vec![
            self.first(),
            Interval::point(mid).with_length(self.length),
            self.last(),
        ]
    }
}

impl Interval {
    fn with_length(self, length: f64) -> Interval {
        Interval {
            lower: self.lower,
            upper: self.lower + length,
        }
    }
}

/// Full product set `{[a, b] : a in lower, b in upper}` of an ETI whose
/// quantiles are not unique under a continuous law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointBox {
    pub lower: ClosedRange,
    pub upper: ClosedRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub families: Vec<IntervalFamily>,
    /// Smallest coverage over the solution set.
    pub coverage: f64,
    /// Largest length over the solution set.
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_box: Option<EndpointBox>,
}

impl FunctionalResult {
    fn from_families(dist: &Distribution, mut families: Vec<IntervalFamily>) -> Self {
        families.sort_by(|x, y| {
            x.lower_range
                .lo
                .total_cmp(&y.lower_range.lo)
                .then(x.length.total_cmp(&y.length))
        });
        let coverage = families
            .iter()
            .flat_map(|f| f.representatives())
            .map(|i| dist.coverage(i.lower, i.upper))
            .fold(f64::INFINITY, f64::min);
        let length = families.iter().map(|f| f.length).fold(0.0, f64::max);
        FunctionalResult {
            families,
            coverage,
            length,
            endpoint_box: None,
        }
    }

    pub fn contains(&self, i: &Interval) -> bool {
        if let Some(b) = &self.endpoint_box {
            return b.lower.contains(i.lower) && b.upper.contains(i.upper);
        }
        self.families.iter().any(|f| f.contains(i))
    }

    /// Members of a finite solution set, in canonical order.
    ///
    /// Families with a nondegenerate lower range contribute their
    /// representatives only.
    pub fn intervals(&self) -> Vec<Interval> {
        self.families
            .iter()
            .flat_map(|f| f.representatives())
            .collect()
    }

    /// True when the solution set is exactly the single interval `i`.
    pub fn is_single(&self, i: &Interval) -> bool {
        self.endpoint_box.is_none()
            && self.families.len() == 1
            && self.families[0].is_degenerate()
            && self.families[0].first().approx_eq(i)
    }

    /// Set equality for finite, degenerate-family solution sets.
    pub fn same_members(&self, expected: &[Interval]) -> bool {
        let got = self.intervals();
        self.families.iter().all(|f| f.is_degenerate())
            && got.len() == expected.len()
            && expected.iter().all(|e| got.iter().any(|g| g.approx_eq(e)))
    }
}

/// Midpoint encoding of a continuous modal interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MidpointSet {
    pub ranges: Vec<ClosedRange>,
    pub coverage: f64,
}

impl MidpointSet {
    pub fn contains(&self, x: f64) -> bool {
        self.ranges.iter().any(|r| r.contains(x))
    }
}

/// `F(upper) - F(lower-)`.
pub fn coverage(f: &Distribution, i: &Interval) -> f64 {
    f.coverage(i.lower, i.upper)
}

/// Equal-tailed intervals: `a` an `alpha/2`-quantile, `b` a
/// `(1 - alpha/2)`-quantile.
pub fn eti(f: &Distribution, alpha: f64) -> Result<FunctionalResult> {
    check_level("alpha", alpha)?;
    let lower = f.quantile_set(alpha / 2.0)?;
    let upper = f.quantile_set(1.0 - alpha / 2.0)?;
    let ends = |r: ClosedRange| -> Vec<f64> {
        if f.is_discrete() {
            r.integers().map(|x| x as f64).collect()
        } else if r.is_degenerate() {
            vec![r.lo]
        } else {
            vec![r.lo, r.hi]
        }
    };
    let mut families = Vec::new();
    for a in ends(lower) {
        for b in ends(upper) {
            if a <= b {
                families.push(IntervalFamily::single(Interval::new(a, b)?));
            }
        }
    }
    let mut result = FunctionalResult::from_families(f, families);
    if !f.is_discrete() && !(lower.is_degenerate() && upper.is_degenerate()) {
        result.endpoint_box = Some(EndpointBox { lower, upper });
    }
    Ok(result)
}

/// Shortest intervals with coverage at least `1 - alpha`.
pub fn si(f: &Distribution, alpha: f64) -> Result<FunctionalResult> {
    check_level("alpha", alpha)?;
    let families = match f {
        Distribution::Discrete(d) => si_discrete(d, 1.0 - alpha),
        Distribution::PiecewiseUniform(p) => si_continuous(p, alpha),
    };
    Ok(FunctionalResult::from_families(f, families))
}

fn si_discrete(d: &DiscreteDist, target: f64) -> Vec<IntervalFamily> {
    let s = d.support();
    let p = d.probs();
    let n = s.len();
    let mut best: Vec<(usize, usize)> = Vec::new();
    let mut best_len = u64::MAX;
    // two pointers: the shortest feasible right end is non-decreasing in the left end
    let mut j = 0;
    let mut mass = 0.0;
    for i in 0..n {
        if j < i {
            j = i;
            mass = 0.0;
        }
        while j < n && mass < target - TAU_CMP {
            mass += p[j];
            j += 1;
        }
        if mass < target - TAU_CMP {
            break;
        }
        let len = s[j - 1] - s[i];
        if len < best_len {
            best_len = len;
            best.clear();
        }
        if len == best_len {
            best.push((i, j - 1));
        }
        mass -= p[i];
    }
    best.into_iter()
        .map(|(i, j)| {
            IntervalFamily::single(Interval::point(s[i] as f64).with_length((s[j] - s[i]) as f64))
        })
        .collect()
}

/// Candidate lower endpoints for coverage-constrained scans: every breakpoint
/// and every point where `F(a) + target` hits the CDF level of a breakpoint.
fn lower_candidates(p: &PiecewiseUniformDist, alpha: f64) -> Vec<f64> {
    let target = 1.0 - alpha;
    let mut cand: Vec<f64> = p.breakpoints().to_vec();
    for &level in p.cdf_at_breakpoints() {
        let shifted = level - target;
        if shifted >= -TAU_CMP {
            let r = p.level_set(shifted.max(0.0));
            cand.push(r.lo);
            cand.push(r.hi);
        }
    }
    sorted_unique(cand)
        .into_iter()
        .filter(|&a| p.cdf(a) <= alpha + TAU_CMP)
        .collect()
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= TAU_CMP);
    v
}

/// Groups sorted candidate points into families: `on[i]` marks candidate `i`
/// as optimal, `joined[i]` marks the open gap between `i` and `i + 1` as
/// entirely optimal.
fn runs(cand: &[f64], on: &[bool], joined: &[bool], length: f64) -> Vec<IntervalFamily> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < cand.len() {
        if !on[i] {
            i += 1;
            continue;
        }
        let start = cand[i];
        while i + 1 < cand.len() && joined[i] && on[i + 1] {
            i += 1;
        }
        out.push(IntervalFamily {
            lower_range: ClosedRange::new(start, cand[i]),
            length,
        });
        i += 1;
    }
    out
}

fn si_continuous(p: &PiecewiseUniformDist, alpha: f64) -> Vec<IntervalFamily> {
    let target = 1.0 - alpha;
    let shortest_from = |a: f64| p.quantile_lower((p.cdf(a) + target).min(1.0)) - a;
    let cand = lower_candidates(p, alpha);
    let lens: Vec<f64> = cand.iter().map(|&a| shortest_from(a)).collect();
    let best = lens.iter().copied().fold(f64::INFINITY, f64::min);
    let on: Vec<bool> = lens.iter().map(|&l| l <= best + TAU_CMP).collect();
    let joined: Vec<bool> = cand
        .windows(2)
        .map(|w| shortest_from(0.5 * (w[0] + w[1])) <= best + TAU_CMP)
        .collect();
    runs(&cand, &on, &joined, best)
}

/// Modal intervals of half-length `c`: windows of length `2c` (of length
/// `floor(2c)` for discrete laws) with maximal coverage.
pub fn mi(f: &Distribution, c: f64) -> Result<FunctionalResult> {
    check_positive("c", c)?;
    let families = match f {
        Distribution::Discrete(d) => {
            let k = discrete_width(c);
            mi_lower_discrete(d, k)
                .into_iter()
                .map(|x| IntervalFamily::single(Interval::point(x as f64).with_length(k as f64)))
                .collect()
        }
        Distribution::PiecewiseUniform(p) => mi_continuous(p, 2.0 * c),
    };
    Ok(FunctionalResult::from_families(f, families))
}

/// Effective window width `floor(2c)` on the integers.
pub fn discrete_width(c: f64) -> u64 {
    (2.0 * c + TAU_CMP).floor().max(0.0) as u64
}

fn mi_continuous(p: &PiecewiseUniformDist, width: f64) -> Vec<IntervalFamily> {
    let window = |a: f64| p.cdf(a + width) - p.cdf(a);
    let cand = sorted_unique(
        p.breakpoints()
            .iter()
            .flat_map(|&b| [b, b - width])
            .collect(),
    );
    let cover: Vec<f64> = cand.iter().map(|&a| window(a)).collect();
    let best = cover.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let on: Vec<bool> = cover.iter().map(|&w| w >= best - TAU_CMP).collect();
    let joined: Vec<bool> = cand
        .windows(2)
        .map(|w| window(0.5 * (w[0] + w[1])) >= best - TAU_CMP)
        .collect();
    runs(&cand, &on, &joined, width)
}

/// Lower-endpoint encoding `l_k`: all `x` maximizing `P(x <= Y <= x + k)`.
/// For `k = 0` this is the mode set.
pub fn mi_lower_discrete(d: &DiscreteDist, k: u64) -> Vec<u64> {
    let first = d.min_atom().saturating_sub(k);
    let windows: Vec<(u64, f64)> = (first..=d.max_atom())
        .map(|x| (x, d.mass_between(x as f64, (x + k) as f64)))
        .collect();
    let best = windows.iter().map(|w| w.1).fold(0.0, f64::max);
    windows
        .into_iter()
        .filter(|w| w.1 >= best - TAU_CMP)
        .map(|w| w.0)
        .collect()
}

/// Midpoint encoding `m_c` of the modal interval for continuous laws.
pub fn mi_mid_continuous(f: &Distribution, c: f64) -> Result<MidpointSet> {
    check_positive("c", c)?;
    let Distribution::PiecewiseUniform(p) = f else {
        return Err(Error::WrongKind {
            expected: "continuous",
        });
    };
    let families = mi_continuous(p, 2.0 * c);
    let coverage = p.cdf(families[0].lower_range.lo + 2.0 * c) - p.cdf(families[0].lower_range.lo);
    Ok(MidpointSet {
        ranges: families
            .iter()
            .map(|fam| ClosedRange::new(fam.lower_range.lo + c, fam.lower_range.hi + c))
            .collect(),
        coverage,
    })
}

/// Membership in the guaranteed-coverage set: coverage at least `1 - alpha`
/// and removing either endpoint leaves at most `1 - alpha`.
pub fn is_gci(f: &Distribution, alpha: f64, i: &Interval) -> bool {
    if f.is_discrete() && !i.is_integral() {
        return false;
    }
    let target = 1.0 - alpha;
    let (a, b) = (i.lower, i.upper);
    let full = f.cdf(b) - f.cdf_left(a);
    let without_right = f.cdf_left(b) - f.cdf_left(a);
    let without_left = f.cdf(b) - f.cdf(a);
    full >= target - TAU_CMP
        && without_right <= target + TAU_CMP
        && without_left <= target + TAU_CMP
}

/// Guaranteed-coverage intervals.
///
/// Discrete laws: all members with endpoints in `0..=max_atom`. Continuous
/// laws: the level set `F(b) - F(a) = 1 - alpha` sampled at the candidate
/// lower endpoints of the support hull, with constant-length stretches merged
/// into families. Members with endpoints outside those bounds carry the same
/// mass as a listed member; [`is_gci`] accepts them as well.
pub fn gci(f: &Distribution, alpha: f64) -> Result<FunctionalResult> {
    check_level("alpha", alpha)?;
    let families = match f {
        Distribution::Discrete(d) => {
            let top = d.max_atom();
            let mut out = Vec::new();
            for a in 0..=top {
                for b in a..=top {
                    let i = Interval::new(a as f64, b as f64)?;
                    if is_gci(f, alpha, &i) {
                        out.push(IntervalFamily::single(i));
                    }
                }
            }
            out
        }
        Distribution::PiecewiseUniform(p) => gci_continuous(p, alpha),
    };
    Ok(FunctionalResult::from_families(f, families))
}

fn gci_continuous(p: &PiecewiseUniformDist, alpha: f64) -> Vec<IntervalFamily> {
    let target = 1.0 - alpha;
    let cand = lower_candidates(p, alpha);
    let right_ends = |a: f64| p.level_set((p.cdf(a) + target).min(1.0));
    let mut families: Vec<IntervalFamily> = Vec::new();
    for pick in [|r: ClosedRange| r.lo, |r: ClosedRange| r.hi] {
        let lens: Vec<f64> = cand
            .iter()
            .map(|&a| pick(right_ends(a)).max(a) - a)
            .collect();
        let on = vec![true; cand.len()];
        let joined: Vec<bool> = cand
            .windows(2)
            .zip(lens.windows(2))
            .map(|(w, l)| {
                let mid = 0.5 * (w[0] + w[1]);
                (l[0] - l[1]).abs() <= TAU_CMP
                    && (pick(right_ends(mid)) - mid - l[0]).abs() <= TAU_CMP
            })
            .collect();
        // each run has constant length; split by run to keep per-run lengths
        let mut i = 0;
        for fam in runs(&cand, &on, &joined, 0.0) {
            let length = lens[i];
            while i < cand.len() && cand[i] <= fam.lower_range.hi + TAU_CMP {
                i += 1;
            }
            let fam = IntervalFamily { length, ..fam };
            if !families.iter().any(|g| same_family(g, &fam)) {
                families.push(fam);
            }
        }
    }
    families
}

fn same_family(x: &IntervalFamily, y: &IntervalFamily) -> bool {
    (x.length - y.length).abs() <= TAU_CMP
        && (x.lower_range.lo - y.lower_range.lo).abs() <= TAU_CMP
        && (x.lower_range.hi - y.lower_range.hi).abs() <= TAU_CMP
}

/// A named functional together with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    Eti {
        alpha: f64,
    },
    Si {
        alpha: f64,
    },
    Gci {
        alpha: f64,
    },
    Mi {
        c: f64,
    },
    /// `l_k`, reported as a point `[x, x]`.
    LowerEndpoint {
        k: u64,
    },
    /// `m_c`, reported as a point `[x, x]`.
    Midpoint {
        c: f64,
    },
    /// The `beta`-quantile, reported as a point `[x, x]`.
    Quantile {
        beta: f64,
    },
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Functional::Eti { alpha } => write!(f, "ETI_{alpha}"),
            Functional::Si { alpha } => write!(f, "SI_{alpha}"),
            Functional::Gci { alpha } => write!(f, "GCI_{alpha}"),
            Functional::Mi { c } => write!(f, "MI_{c}"),
            Functional::LowerEndpoint { k } => write!(f, "l_{k}"),
            Functional::Midpoint { c } => write!(f, "m_{c}"),
            Functional::Quantile { beta } => write!(f, "q_{beta}"),
        }
    }
}

/// A functional evaluated at one law, ready for membership queries.
#[derive(Debug, Clone)]
pub struct Solution<'a> {
    functional: Functional,
    dist: &'a Distribution,
    result: Option<FunctionalResult>,
    points: Vec<ClosedRange>,
    quantiles: Option<(ClosedRange, ClosedRange)>,
}

impl Functional {
    pub fn is_point_valued(&self) -> bool {
        matches!(
            self,
            Functional::LowerEndpoint { .. }
                | Functional::Midpoint { .. }
                | Functional::Quantile { .. }
        )
    }

    pub fn solve<'a>(&self, dist: &'a Distribution) -> Result<Solution<'a>> {
        let mut sol = Solution {
            functional: *self,
            dist,
            result: None,
            points: Vec::new(),
            quantiles: None,
        };
        match *self {
            Functional::Eti { alpha } => {
                sol.result = Some(eti(dist, alpha)?);
                sol.quantiles = Some((
                    dist.quantile_set(alpha / 2.0)?,
                    dist.quantile_set(1.0 - alpha / 2.0)?,
                ));
            }
            Functional::Si { alpha } => sol.result = Some(si(dist, alpha)?),
            Functional::Gci { alpha } => sol.result = Some(gci(dist, alpha)?),
            Functional::Mi { c } => sol.result = Some(mi(dist, c)?),
            Functional::LowerEndpoint { k } => {
                let Distribution::Discrete(d) = dist else {
                    return Err(Error::WrongKind {
                        expected: "discrete",
                    });
                };
                sol.points = mi_lower_discrete(d, k)
                    .into_iter()
                    .map(|x| ClosedRange::point(x as f64))
                    .collect();
            }
            Functional::Midpoint { c } => sol.points = mi_mid_continuous(dist, c)?.ranges,
            Functional::Quantile { beta } => sol.points = vec![dist.quantile_set(beta)?],
        }
        Ok(sol)
    }
}

impl Solution<'_> {
    pub fn functional(&self) -> Functional {
        self.functional
    }

    /// The interval-valued solution, if the functional is interval valued.
    pub fn result(&self) -> Option<&FunctionalResult> {
        self.result.as_ref()
    }

    pub fn contains(&self, r: &Interval) -> bool {
        let f = self.dist;
        if f.is_discrete() && !r.is_integral() {
            return false;
        }
        match self.functional {
            Functional::Eti { .. } => {
                let (lo, hi) = self.quantiles.expect("quantile sets are set for ETI");
                lo.contains(r.lower) && hi.contains(r.upper)
            }
            Functional::Si { alpha } => {
                let best = self.result.as_ref().map_or(0.0, |x| x.length);
                coverage(f, r) >= 1.0 - alpha - TAU_CMP && r.length() <= best + TAU_CMP
            }
            Functional::Gci { alpha } => is_gci(f, alpha, r),
            Functional::Mi { .. } => {
                let res = self.result.as_ref().expect("result is set for MI");
                (r.length() - res.families[0].length).abs() <= TAU_CMP
                    && coverage(f, r) >= res.coverage - TAU_CMP
            }
            Functional::LowerEndpoint { .. } | Functional::Quantile { .. } => {
                r.length() <= TAU_CMP && self.points.iter().any(|p| p.contains(r.lower))
            }
            Functional::Midpoint { .. } => {
                r.length() <= TAU_CMP && self.points.iter().any(|p| p.contains(r.midpoint()))
            }
        }
    }

    /// A finite set of members: everything for discrete laws, family ends
    /// and midpoints for continua.
    pub fn members(&self) -> Vec<Interval> {
        if let Some(res) = &self.result {
            return res.intervals();
        }
        let discrete = self.dist.is_discrete();
        self.points
            .iter()
            .flat_map(|r| -> Vec<f64> {
                if discrete {
                    r.integers().map(|x| x as f64).collect()
                } else if r.is_degenerate() {
                    vec![r.lo]
                } else {
                    vec![r.lo, 0.5 * (r.lo + r.hi), r.hi]
                }
            })
            .map(Interval::point)
            .collect()
    }
}
