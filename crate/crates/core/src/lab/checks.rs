use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{GridSpec, LabReport, LambdaPoint, NamedDist, ReportGrid, Verdict, Witness};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::functionals::{Functional, Interval};
use crate::scoring::{expected_score, ScoreSpec};
use crate::{FAIL_GAP, TAU_ARGMIN};

/// Exact expected score of every grid candidate, in grid order.
pub fn expected_scores(f: &Distribution, score: &ScoreSpec, grid: &ReportGrid) -> Result<Vec<f64>> {
    grid.candidates()
        .par_iter()
        .map(|c| expected_score(f, score, c))
        .collect()
}

/// Grid candidates whose expected score is within `TAU_ARGMIN` of the grid
/// minimum.
pub fn brute_force_minimizers(
    f: &Distribution,
    score: &ScoreSpec,
    grid: &ReportGrid,
) -> Result<Vec<Interval>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let scores = expected_scores(f, score, grid)?;
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(grid
        .candidates()
        .iter()
        .zip(&scores)
        .filter(|(_, &s)| s <= best + TAU_ARGMIN)
        .map(|(c, _)| *c)
        .collect())
}

enum Outcome {
    Agree,
    Inconclusive(Witness),
    Fail(Witness),
}

fn check_fixture(
    functional: Functional,
    score: &ScoreSpec,
    fixture: &NamedDist,
    grid: &GridSpec,
) -> Result<Outcome> {
    let sol = functional.solve(&fixture.dist)?;
    let members = sol.members();
    let grid = grid.build(&members);
    if let Some(m) = members.iter().find(|m| !grid.contains(m)) {
        return Ok(Outcome::Inconclusive(
            Witness::new(&fixture.id)
                .report(*m)
                .note("solution member missing from the report grid"),
        ));
    }
    let scores = expected_scores(&fixture.dist, score, &grid)?;
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let in_t: Vec<bool> = grid.candidates().iter().map(|c| sol.contains(c)).collect();
    let best_in_t = scores
        .iter()
        .zip(&in_t)
        .filter(|(_, &t)| t)
        .map(|(&s, _)| s)
        .fold(f64::INFINITY, f64::min);

    let mut pending = None;
    for ((c, &s), &t) in grid.candidates().iter().zip(&scores).zip(&in_t) {
        let gap = s - best;
        if t && gap > TAU_ARGMIN {
            let w = Witness::new(&fixture.id)
                .report(*c)
                .gap(gap)
                .note("solution member is not a minimizer");
            if gap >= FAIL_GAP {
                return Ok(Outcome::Fail(w));
            }
            pending.get_or_insert(w);
        }
        if !t && gap <= TAU_ARGMIN {
            return Ok(Outcome::Fail(
                Witness::new(&fixture.id)
                    .report(*c)
                    .gap(best_in_t - s)
                    .note("non-member attains the minimum"),
            ));
        }
    }
    Ok(match pending {
        Some(w) => Outcome::Inconclusive(w),
        None => Outcome::Agree,
    })
}

/// Compares the brute-force minimizer set with the functional's solution
/// set on every fixture.
pub fn consistency_check(
    functional: Functional,
    score: &ScoreSpec,
    fixtures: &[NamedDist],
    grid: &GridSpec,
) -> Result<LabReport> {
    let outcomes: Vec<Outcome> = fixtures
        .par_iter()
        .map(|fx| check_fixture(functional, score, fx, grid))
        .collect::<Result<_>>()?;
    let name = format!("consistency {functional} vs {}", score.name());
    let failed = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Fail(_)))
        .count();
    let unresolved = outcomes
        .iter()
        .filter(|o| matches!(o, Outcome::Inconclusive(_)))
        .count();
    let verdict = if failed > 0 {
        Verdict::Fail
    } else if unresolved > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let mut report = LabReport::new(name, verdict).with_details(json!({
        "fixtures": fixtures.len(),
        "failed": failed,
        "inconclusive": unresolved,
    }));
    let first = outcomes.into_iter().find_map(|o| match (o, verdict) {
        (Outcome::Fail(w), Verdict::Fail) => Some(w),
        (Outcome::Inconclusive(w), Verdict::Inconclusive) => Some(w),
        _ => None,
    });
    report.witnesses.extend(first);
    Ok(report)
}

fn push_unique(v: &mut Vec<Interval>, items: impl IntoIterator<Item = Interval>) {
    for i in items {
        if !v.iter().any(|x| x.approx_eq(&i)) {
            v.push(i);
        }
    }
}

/// Checks `T(F0) ∩ T(F1) ⊆ T(F_λ)` and, when the intersection is nonempty,
/// `T(F0) ∩ T(F1) = T(F_λ)` along `F_λ = λ F1 + (1 - λ) F0`. Set relations are
/// evaluated on the members of `T(F0)`, `T(F1)` and `T(F_λ)`.
pub fn cxls_check(
    functional: Functional,
    f0: &Distribution,
    f1: &Distribution,
    lambdas: &[f64],
) -> Result<LabReport> {
    let t0 = functional.solve(f0)?;
    let t1 = functional.solve(f1)?;
    let mut base = Vec::new();
    push_unique(&mut base, t0.members());
    push_unique(&mut base, t1.members());

    let mut trace = Vec::new();
    let mut cxls_witnesses = Vec::new();
    let mut star_witnesses = Vec::new();
    for &lambda in lambdas {
        let fl = Distribution::mix(&[f0.clone(), f1.clone()], &[1.0 - lambda, lambda])?;
        let tl = functional.solve(&fl)?;
        let mut cand = base.clone();
        let members = tl.members();
        push_unique(&mut cand, members.iter().copied());
        let shared: Vec<Interval> = cand
            .iter()
            .copied()
            .filter(|c| t0.contains(c) && t1.contains(c))
            .collect();
        let lost = shared.iter().find(|c| !tl.contains(c));
        let cxls = lost.is_none();
        if let Some(c) = lost {
            cxls_witnesses.push(
                Witness::new(format!("lambda={lambda}"))
                    .report(*c)
                    .note("shared member missing from the mixture's solution"),
            );
        }
        let cxls_star = if shared.is_empty() {
            None
        } else {
            let extra = cand
                .iter()
                .find(|c| tl.contains(c) && !(t0.contains(c) && t1.contains(c)));
            if let Some(c) = extra {
                star_witnesses.push(
                    Witness::new(format!("lambda={lambda}"))
                        .report(*c)
                        .note("mixture solution outside the shared set"),
                );
            }
            Some(cxls && extra.is_none())
        };
        trace.push(LambdaPoint {
            lambda,
            members,
            cxls: Some(cxls),
            cxls_star,
            t0_in: None,
            t1_in: None,
        });
    }

    let cxls = sub_verdict("cxls", cxls_witnesses);
    let star = sub_verdict("cxls_star", star_witnesses);
    let verdict = if cxls.verdict == Verdict::Pass && star.verdict == Verdict::Pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut report = LabReport::new(format!("level sets of {functional}"), verdict);
    report.witnesses = cxls
        .witnesses
        .iter()
        .chain(&star.witnesses)
        .take(1)
        .cloned()
        .collect();
    report.checks = vec![cxls, star];
    report.lambda_trace = trace;
    Ok(report)
}

fn sub_verdict(name: &str, mut witnesses: Vec<Witness>) -> LabReport {
    let mut r = LabReport::new(
        name,
        if witnesses.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    );
    witnesses.truncate(1);
    r.witnesses = witnesses;
    r
}

/// Confirms the non-elicitability witness: at every grid λ exactly one of
/// `t0`, `t1` belongs to `T(F_λ)`.
pub fn prop2_witness_check(
    functional: Functional,
    f0: &Distribution,
    f1: &Distribution,
    t0: &Interval,
    t1: &Interval,
    lambdas: &[f64],
) -> Result<LabReport> {
    let name = format!("witness pair for {functional}");
    let s0 = functional.solve(f0)?;
    let s1 = functional.solve(f1)?;
    if !(s0.contains(t0) && !s1.contains(t0) && s1.contains(t1) && !s0.contains(t1)) {
        let mut r = LabReport::new(name, Verdict::Inconclusive);
        r.witnesses.push(
            Witness::new("F0/F1")
                .note("precondition t0 in T(F0) minus T(F1), t1 in T(F1) minus T(F0) violated"),
        );
        return Ok(r);
    }
    let mut report = LabReport::new(name, Verdict::Pass);
    for &lambda in lambdas {
        let fl = Distribution::mix(&[f0.clone(), f1.clone()], &[1.0 - lambda, lambda])?;
        let tl = functional.solve(&fl)?;
        let (in0, in1) = (tl.contains(t0), tl.contains(t1));
        if in0 == in1 && report.verdict == Verdict::Pass {
            report.verdict = Verdict::Fail;
            report.witnesses.push(
                Witness::new(format!("lambda={lambda}"))
                    .report(if in0 { *t0 } else { *t1 })
                    .note(if in0 {
                        "both reports belong to the mixture's solution"
                    } else {
                        "neither report belongs to the mixture's solution"
                    }),
            );
        }
        report.lambda_trace.push(LambdaPoint {
            lambda,
            members: tl.members(),
            cxls: None,
            cxls_star: None,
            t0_in: Some(in0),
            t1_in: Some(in1),
        });
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreProperty {
    Translation,
    Homogeneity,
    Symmetry,
}

impl ScoreProperty {
    pub fn name(&self) -> &'static str {
        match self {
            ScoreProperty::Translation => "translation",
            ScoreProperty::Homogeneity => "homogeneity",
            ScoreProperty::Symmetry => "symmetry",
        }
    }
}

/// Identity defect tolerance for exact property checks.
const PROPERTY_TOL: f64 = 1e-12;

/// Tests a score identity on random dyadic-rational inputs.
pub fn score_property_check(
    score: &ScoreSpec,
    property: ScoreProperty,
    trials: usize,
    seed: u64,
) -> Result<LabReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dyadic = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.random_range(lo..=hi) as f64 / 8.0;
    let mut report = LabReport::new(
        format!("{} {}", score.name(), property.name()),
        Verdict::Pass,
    );
    for trial in 0..trials {
        let a = dyadic(&mut rng, -80, 80);
        let b = if score.is_point_score() {
            a
        } else {
            a + dyadic(&mut rng, 0, 80)
        };
        let y = dyadic(&mut rng, -120, 120);
        let i = Interval::new(a, b)?;
        let s = score.evaluate(&i, y);
        let (other, note) = match property {
            ScoreProperty::Translation => {
                let z = dyadic(&mut rng, -80, 80);
                let moved = Interval::new(a - z, b - z)?;
                (score.evaluate(&moved, y - z), format!("shift {z}"))
            }
            ScoreProperty::Homogeneity => {
                let c = dyadic(&mut rng, 1, 32);
                let scaled = Interval::new(c * a, c * b)?;
                (score.evaluate(&scaled, c * y) / c, format!("scale {c}"))
            }
            ScoreProperty::Symmetry => {
                let mirrored = Interval::new(-b, -a)?;
                (score.evaluate(&mirrored, -y), "mirror".to_string())
            }
        };
        let defect = (s - other).abs();
        if defect.is_nan() || defect > PROPERTY_TOL {
            report.verdict = Verdict::Fail;
            report.witnesses.push(
                Witness::new(format!("trial {trial}"))
                    .report(i)
                    .observation(y)
                    .gap(defect)
                    .note(note),
            );
            break;
        }
    }
    report.details = Some(json!({ "trials": trials, "seed": seed }));
    Ok(report)
}

/// Compares each ETI step score with its elementary-score mixture on an
/// `n x n x n` grid of `(a, b, y)` in `[-4, 4]` with `a < b`.
pub fn mixture_identity_check(seed: u64, instances: usize, n: usize) -> LabReport {
    let points: Vec<f64> = (0..n)
        .map(|i| -4.0 + 8.0 * i as f64 / (n - 1).max(1) as f64)
        .collect();
    let scores = super::fixtures::random_symmetric_step_scores(seed, instances);
    let worst: Vec<(f64, Interval, f64)> = scores
        .par_iter()
        .map(|s| {
            let mut worst = (0.0, Interval::point(0.0), 0.0);
            for (i, &a) in points.iter().enumerate() {
                for &b in &points[i + 1..] {
                    let r = Interval::new(a, b).expect("a < b");
                    for &y in &points {
                        let d = (s.eti.evaluate(&r, y) - s.mixture.evaluate(&r, y)).abs();
                        if d > worst.0 {
                            worst = (d, r, y);
                        }
                    }
                }
            }
            worst
        })
        .collect();
    let max = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let mut report = LabReport::new(
        "mixture identity",
        if max <= MIXTURE_TOL {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    );
    if let Some((k, w)) = worst.iter().enumerate().find(|(_, w)| w.0 > MIXTURE_TOL) {
        report.witnesses.push(
            Witness::new(format!("instance {k}"))
                .report(w.1)
                .observation(w.2)
                .gap(w.0),
        );
    }
    report.details = Some(json!({ "instances": instances, "grid": n, "max_difference": max }));
    report
}

const MIXTURE_TOL: f64 = 1e-10;
