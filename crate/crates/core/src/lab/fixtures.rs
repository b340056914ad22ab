//! Shipped laws for the counterexample constructions and seeded random
//! fixture generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::NamedDist;
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::functionals::{coverage, si, Interval};
use crate::scoring::{
    expected_score, is_decomposition, symmetric_partner, MonotoneFunction, ScoreSpec, StepMeasure,
};
use crate::TAU_CMP;

fn fixture_err(msg: impl Into<String>) -> Error {
    Error::Fixture(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1Row {
    pub interval: Interval,
    pub coverage: f64,
    pub expected_score: f64,
    pub length: f64,
    pub expected_penalty: f64,
}

/// The law `(0.1, 0.4, 0.4, 0.1)` on `{0, 1, 2, 3}` and the properties of
/// its four equal-tailed intervals at `alpha = 0.2`.
pub fn fixture_table1() -> (Distribution, Vec<Table1Row>) {
    let g = Distribution::discrete(vec![0, 1, 2, 3], vec![0.1, 0.4, 0.4, 0.1]).expect("valid law");
    let alpha = 0.2;
    let score = ScoreSpec::Winkler { alpha };
    let rows = [(1.0, 2.0), (0.0, 2.0), (1.0, 3.0), (0.0, 3.0)]
        .into_iter()
        .map(|(a, b)| {
            let i = Interval::new(a, b).expect("ordered");
            let expected = expected_score(&g, &score, &i).expect("integer report");
            let length = is_decomposition(alpha, &i, a).0;
            Table1Row {
                interval: i,
                coverage: coverage(&g, &i),
                expected_score: expected,
                length,
                expected_penalty: expected - length,
            }
        })
        .collect();
    (g, rows)
}

/// Densities `(1-α) 1[0,1] + (α/3) 1[2,5]` and `((1-α)/2) 1[0,2] + (α/3) 1[2,5]`.
pub fn fixture_example_uniform(alpha: f64) -> Result<(Distribution, Distribution)> {
    if !(alpha > 0.0 && alpha < 0.6) {
        return Err(fixture_err(format!(
            "alpha must lie in (0, 0.6), got {alpha}"
        )));
    }
    let f0 =
        Distribution::piecewise_uniform(vec![0.0, 1.0, 2.0, 5.0], vec![1.0 - alpha, 0.0, alpha])?;
    let f1 = Distribution::piecewise_uniform(vec![0.0, 2.0, 5.0], vec![1.0 - alpha, alpha])?;
    Ok((f0, f1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteExample {
    pub alpha: f64,
    pub k: u64,
    pub eps: f64,
    pub delta: f64,
}

impl Default for DiscreteExample {
    fn default() -> Self {
        DiscreteExample {
            alpha: 0.25,
            k: 2,
            eps: 0.05,
            delta: 0.02,
        }
    }
}

/// Two unimodal laws with mode `k`: mass `eps + delta` at `k - 1`,
/// `1 - alpha - eps` at `k`, and `eps + delta` (F0) or `eps - delta` (F1) at
/// `k + 1`. The remaining mass is spread in equal atoms on `k + 2, k + 3, ...`,
/// each no heavier than the atom at `k + 1`, using as few atoms as possible.
pub fn fixture_example_discrete(p: &DiscreteExample) -> Result<(Distribution, Distribution)> {
    let DiscreteExample {
        alpha,
        k,
        eps,
        delta,
    } = *p;
    if !(alpha > 0.0 && alpha < 1.0 / 3.0) {
        return Err(fixture_err("alpha must lie in (0, 1/3)"));
    }
    if k < 1 {
        return Err(fixture_err("k must be at least 1"));
    }
    if !(eps > 0.0 && eps < alpha / 3.0 && delta > 0.0 && delta < eps) {
        return Err(fixture_err("need 0 < delta < eps < alpha/3"));
    }
    let build = |right: f64| -> Result<Distribution> {
        let mut support = vec![k - 1, k, k + 1];
        let mut probs = vec![eps + delta, 1.0 - alpha - eps, right];
        let rest = 1.0 - probs.iter().sum::<f64>();
        let n = (rest / right - TAU_CMP).ceil().max(1.0) as u64;
        for j in 0..n {
            support.push(k + 2 + j);
            probs.push(rest / n as f64);
        }
        Distribution::discrete(support, probs)
    };
    let f0 = build(eps + delta)?;
    let f1 = build(eps - delta)?;

    let iv = |a: u64, b: u64| Interval::new(a as f64, b as f64).expect("ordered");
    let s0 = si(&f0, alpha)?;
    let s1 = si(&f1, alpha)?;
    if !s0.same_members(&[iv(k - 1, k), iv(k, k + 1)]) || !s1.same_members(&[iv(k - 1, k)]) {
        return Err(fixture_err("shortest-interval structure does not hold"));
    }
    Ok((f0, f1))
}

/// True when the probabilities rise up to `mode` and fall after it.
pub fn is_unimodal_at(f: &Distribution, mode: u64) -> bool {
    let Distribution::Discrete(d) = f else {
        return false;
    };
    let top = d.max_atom();
    let mass = |x: u64| d.mass_between(x as f64, x as f64);
    (0..mode).all(|x| mass(x) <= mass(x + 1))
        && (mode..top).all(|x| mass(x) >= mass(x + 1))
        && (0..=top)
            .filter(|&x| x != mode)
            .all(|x| mass(x) < mass(mode))
}

/// A law whose shortest interval `[0, b]` is flanked by a gap `(b, b + eps]`.
#[derive(Debug, Clone)]
pub struct Condition1Instance {
    pub f: Distribution,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub alpha: f64,
}

impl Condition1Instance {
    /// The law stretched by `(b + eps/2) / b`, whose shortest interval is
    /// `[0, b + eps/2]`.
    pub fn stretched(&self) -> Result<Distribution> {
        self.f
            .location_scale(0.0, (self.b + 0.5 * self.eps) / self.b)
    }
}

/// `F = α U[2b, 3b] + (1 - α) U[0, b]`, with the gap and growth conditions
/// asserted on a grid of smaller levels.
pub fn condition1_instance(alpha: f64, b: f64, eps: f64) -> Result<Condition1Instance> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(fixture_err("alpha must lie in (0, 1/2)"));
    }
    if !(b > 0.0 && b.is_finite() && eps > 0.0 && eps.is_finite()) {
        return Err(fixture_err("b and eps must be positive"));
    }
    let f = Distribution::piecewise_uniform(
        vec![0.0, b, 2.0 * b, 3.0 * b],
        vec![1.0 - alpha, 0.0, alpha],
    )?;
    let shortest = si(&f, alpha)?;
    if !shortest.is_single(&Interval::new(0.0, b)?) {
        return Err(fixture_err("shortest interval is not [0, b]"));
    }
    if (f.cdf(b) - f.cdf(b + eps)).abs() > TAU_CMP {
        return Err(fixture_err("no gap of width eps right of b"));
    }
    for j in 1..10 {
        let beta = alpha * j as f64 / 10.0;
        if si(&f, beta)?.length <= b + 0.5 * eps {
            return Err(fixture_err(format!(
                "shortest interval at level {beta} is not longer than b + eps/2"
            )));
        }
    }
    Ok(Condition1Instance {
        f,
        a: 0.0,
        b,
        eps,
        alpha,
    })
}

#[derive(Debug, Clone)]
pub struct GciFixture {
    pub f0: Distribution,
    pub f1: Distribution,
    /// Window over-covered by F0 and under-covered by F1.
    pub witness: Interval,
    /// Guaranteed-coverage interval of both laws.
    pub shared: Interval,
}

/// Two piecewise-uniform laws on `[0, 2]` sharing the guaranteed-coverage
/// interval `[0, 1]` while `[0.5, 1.5]` carries `1 - α ± p/2` mass.
pub fn fixture_gci_cxls(alpha: f64) -> Result<GciFixture> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(fixture_err("alpha must lie in (0, 1)"));
    }
    let p = alpha.min(1.0 - alpha) / 2.0;
    let b = vec![0.0, 0.5, 1.0, 1.5, 2.0];
    let f0 = Distribution::piecewise_uniform(
        b.clone(),
        vec![p / 2.0, 1.0 - alpha - p / 2.0, p, alpha - p],
    )?;
    let f1 =
        Distribution::piecewise_uniform(b, vec![1.5 * p, 1.0 - alpha - 1.5 * p, p, alpha - p])?;
    Ok(GciFixture {
        f0,
        f1,
        witness: Interval::new(0.5, 1.5)?,
        shared: Interval::new(0.0, 1.0)?,
    })
}

/// Two continuous laws with the common shortest interval `[0, 1]` at
/// `alpha = 0.2`.
pub fn fixture_shared_si() -> (Distribution, Distribution) {
    let f0 = Distribution::piecewise_uniform(vec![0.0, 1.0, 2.0, 5.0], vec![0.8, 0.0, 0.2])
        .expect("valid law");
    let f1 =
        Distribution::piecewise_uniform(vec![0.0, 0.5, 1.0, 2.0, 5.0], vec![0.5, 0.3, 0.0, 0.2])
            .expect("valid law");
    (f0, f1)
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

/// Laws on `{0, ..., 10}` with symmetric Dirichlet(1) weights.
pub fn random_discrete(seed: u64, count: usize) -> Vec<NamedDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let probs = dirichlet(&mut rng, 11);
            let dist = Distribution::discrete((0..=10).collect(), probs).expect("valid law");
            NamedDist::new(format!("discrete-{seed}-{i}"), dist)
        })
        .collect()
}

/// Piecewise-uniform laws with 2 to 6 pieces whose widths are multiples of
/// 0.1 and whose Dirichlet weights are zeroed on roughly a fifth of the
/// pieces, leaving gaps in the support.
pub fn random_piecewise_uniform(seed: u64, count: usize) -> Vec<NamedDist> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let pieces = rng.random_range(2..=6);
            let mut b = vec![rng.random_range(0..=10) as f64 / 10.0];
            for _ in 0..pieces {
                let w = rng.random_range(1..=10) as f64 / 10.0;
                b.push(b[b.len() - 1] + w);
            }
            let mut m = dirichlet(&mut rng, pieces);
            for x in &mut m[1..pieces - 1] {
                if rng.random_bool(0.2) {
                    *x = 0.0;
                }
            }
            let total: f64 = m.iter().sum();
            m.iter_mut().for_each(|x| *x /= total);
            let dist = Distribution::piecewise_uniform(b, m).expect("valid law");
            NamedDist::new(format!("pw-uniform-{seed}-{i}"), dist)
        })
        .collect()
}

/// An ETI score with step `g1`, its symmetric partner `g2`, and the
/// mixture of elementary scores it should equal.
#[derive(Debug, Clone)]
pub struct SymmetricStepScore {
    pub eti: ScoreSpec,
    pub mixture: ScoreSpec,
}

/// Seeded symmetric step-function ETI scores with jumps on both sides of the
/// origin.
pub fn random_symmetric_step_scores(seed: u64, count: usize) -> Vec<SymmetricStepScore> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let alpha = rng.random_range(1..=19) as f64 / 20.0;
            let w1 = rng.random_range(1..=16) as f64 / 4.0;
            let w2 = rng.random_range(1..=16) as f64 / 4.0;
            let mut locs: Vec<i32> = (0..rng.random_range(1..=6))
                .map(|_| rng.random_range(-24..=24))
                .collect();
            locs.sort_unstable();
            locs.dedup();
            let jumps = locs
                .into_iter()
                .map(|l| [l as f64 / 8.0, rng.random_range(1..=8) as f64 / 4.0])
                .collect();
            let base = rng.random_range(-4..=4) as f64;
            let g1 = MonotoneFunction::step(jumps, base).expect("valid step");
            let g2 = symmetric_partner(w1, w2, &g1).expect("positive weights");
            let measure = StepMeasure::from_step_score(w1, &g1).expect("step g1");
            SymmetricStepScore {
                eti: ScoreSpec::EtiFamily {
                    alpha,
                    w1,
                    w2,
                    g1,
                    g2,
                },
                mixture: ScoreSpec::Mixture { alpha, measure },
            }
        })
        .collect()
}

/// Names accepted by [`named_fixture`].
pub const FIXTURES: [&str; 11] = [
    "table1-g",
    "example-uniform-f0",
    "example-uniform-f1",
    "example-discrete-f0",
    "example-discrete-f1",
    "condition1-f0",
    "condition1-f1",
    "gci-cxls-f0",
    "gci-cxls-f1",
    "shared-si-f0",
    "shared-si-f1",
];

/// A shipped law, with the parameters used by the experiments.
pub fn named_fixture(name: &str) -> Result<Distribution> {
    let alpha = 0.2;
    let pick =
        |pair: (Distribution, Distribution), second: bool| if second { pair.1 } else { pair.0 };
    let second = name.ends_with("-f1");
    Ok(match name {
        "table1-g" => fixture_table1().0,
        "example-uniform-f0" | "example-uniform-f1" => {
            pick(fixture_example_uniform(alpha)?, second)
        }
        "example-discrete-f0" | "example-discrete-f1" => pick(
            fixture_example_discrete(&DiscreteExample::default())?,
            second,
        ),
        "condition1-f0" | "condition1-f1" => {
            let c = condition1_instance(alpha, 1.0, 0.5)?;
            if second {
                c.stretched()?
            } else {
                c.f
            }
        }
        "gci-cxls-f0" | "gci-cxls-f1" => {
            let g = fixture_gci_cxls(alpha)?;
            pick((g.f0, g.f1), second)
        }
        "shared-si-f0" | "shared-si-f1" => pick(fixture_shared_si(), second),
        other => return Err(fixture_err(format!("unknown fixture `{other}`"))),
    })
}
