//! Acceptance gate: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ivscore::functionals::{
    coverage, eti, gci, is_gci, mi_lower_discrete, mi_mid_continuous, si, Functional,
};
use ivscore::lab::fixtures::{
    condition1_instance, fixture_example_discrete, fixture_example_uniform, fixture_gci_cxls,
    random_discrete, random_piecewise_uniform, random_symmetric_step_scores, DiscreteExample,
};
use ivscore::lab::{
    brute_force_minimizers, consistency_check, cxls_check, lambda_grid, prop2_witness_check,
    score_property_check, GridSpec, NamedDist, ReportGrid, ScoreProperty, Verdict,
};
use ivscore::scoring::{expected_score, is_decomposition, sample_mean};
use ivscore::{Distribution, Interval, MonotoneFunction, ScoreSpec, FAIL_GAP};

const SEED: u64 = 7;

type Outcome = Result<(), String>;

fn iv(a: f64, b: f64) -> Interval {
    Interval::new(a, b).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mix(f0: &Distribution, f1: &Distribution, lambda: f64) -> Distribution {
    Distribution::mix(&[f0.clone(), f1.clone()], &[1.0 - lambda, lambda]).unwrap()
}

fn same_set(found: &[Interval], expected: &[Interval]) -> bool {
    found.len() == expected.len()
        && found
            .iter()
            .all(|a| expected.iter().any(|b| a.approx_eq(b)))
        && expected
            .iter()
            .all(|b| found.iter().any(|a| a.approx_eq(b)))
}

fn ac1_table1() -> Outcome {
    let g = Distribution::discrete(vec![0, 1, 2, 3], vec![0.1, 0.4, 0.4, 0.1]).unwrap();
    let alpha = 0.2;
    let rows = [
        (iv(1.0, 2.0), 0.8, 1.0, 2.0),
        (iv(0.0, 2.0), 0.9, 2.0, 1.0),
        (iv(1.0, 3.0), 0.9, 2.0, 1.0),
        (iv(0.0, 3.0), 1.0, 3.0, 0.0),
    ];
    let members = eti(&g, alpha).map_err(|e| e.to_string())?;
    let expected: Vec<Interval> = rows.iter().map(|r| r.0).collect();
    ensure(same_set(&members.intervals(), &expected), || {
        format!("eti members {:?}", members.intervals())
    })?;
    let winkler = ScoreSpec::Winkler { alpha };
    for (i, cov, len, pen) in rows {
        let e = expected_score(&g, &winkler, &i).map_err(|e| e.to_string())?;
        let penalty: f64 = (0..4)
            .map(|y| {
                coverage(&g, &Interval::point(y as f64)) * is_decomposition(alpha, &i, y as f64).1
            })
            .sum();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
        ensure(
            close(coverage(&g, &i), cov)
                && close(e, 3.0)
                && close(i.length(), len)
                && close(penalty, pen),
            || {
                format!(
                    "{i}: coverage {} score {e} penalty {penalty}",
                    coverage(&g, &i)
                )
            },
        )?;
    }
    Ok(())
}

fn nonlinear_g() -> MonotoneFunction {
    MonotoneFunction::piecewise_linear(vec![0.0, 2.0, 5.0, 10.0], vec![0.0, 1.0, 4.0, 6.0]).unwrap()
}

fn ac2_eti_consistency() -> Outcome {
    let grid = ReportGrid::integer_intervals(0, 10);
    ensure(grid.len() == 66, || {
        format!("grid has {} intervals", grid.len())
    })?;
    for fx in random_discrete(SEED, 100) {
        for alpha in [0.1, 0.2, 0.5] {
            let truth = eti(&fx.dist, alpha).map_err(|e| e.to_string())?.intervals();
            let scores = [
                ScoreSpec::Winkler { alpha },
                ScoreSpec::EtiFamily {
                    alpha,
                    w1: 1.0,
                    w2: 1.0,
                    g1: nonlinear_g(),
                    g2: nonlinear_g(),
                },
            ];
            for s in &scores {
                let found =
                    brute_force_minimizers(&fx.dist, s, &grid).map_err(|e| e.to_string())?;
                ensure(same_set(&found, &truth), || {
                    format!(
                        "{} alpha={alpha} {}: argmin {found:?} vs eti {truth:?}",
                        fx.id,
                        s.name()
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn ac3_quantile_consistency() -> Outcome {
    let grid = ReportGrid::integer_points(0, 10);
    for fx in random_discrete(SEED, 100) {
        for beta in [0.05, 0.5, 0.95] {
            let s = ScoreSpec::Quantile {
                alpha: beta,
                g: MonotoneFunction::identity(),
            };
            let found = brute_force_minimizers(&fx.dist, &s, &grid).map_err(|e| e.to_string())?;
            let q = fx.dist.quantile_set(beta).map_err(|e| e.to_string())?;
            let truth: Vec<Interval> = q.integers().map(|x| Interval::point(x as f64)).collect();
            ensure(same_set(&found, &truth), || {
                format!("{} beta={beta}: argmin {found:?} vs quantiles {q:?}", fx.id)
            })?;
        }
    }
    Ok(())
}

fn si_path(f0: &Distribution, f1: &Distribution, t0: Interval, t1: Interval) -> Outcome {
    let alpha = 0.2;
    let single =
        |f: &Distribution, t: &Interval| si(f, alpha).map(|r| r.is_single(t)).unwrap_or(false);
    ensure(single(f0, &t0), || format!("si(F0) != {t0}"))?;
    ensure(single(f1, &t1), || format!("si(F1) != {t1}"))?;
    let lambdas = lambda_grid(99);
    ensure(lambdas.len() == 99, || "lambda grid size".into())?;
    for l in &lambdas {
        ensure(single(&mix(f0, f1, *l), &t1), || {
            format!("si(F_{l}) != {t1}")
        })?;
    }
    let prop2 = prop2_witness_check(Functional::Si { alpha }, f0, f1, &t0, &t1, &lambdas)
        .map_err(|e| e.to_string())?;
    ensure(prop2.verdict == Verdict::Pass, || {
        format!("witness check {:?}", prop2.verdict)
    })?;

    let hi = f0.support_hull().1.max(f1.support_hull().1);
    let fixtures = [
        NamedDist::new("F0", f0.clone()),
        NamedDist::new("F1", f1.clone()),
    ];
    let grid = GridSpec::UniformIntervals {
        lo: 0.0,
        hi,
        step: 0.05,
    };
    let r = consistency_check(
        Functional::Si { alpha },
        &ScoreSpec::Winkler { alpha },
        &fixtures,
        &grid,
    )
    .map_err(|e| e.to_string())?;
    let witnessed = r
        .witnesses
        .iter()
        .any(|w| w.gap.is_some_and(|g| g >= FAIL_GAP));
    ensure(r.verdict == Verdict::Fail && witnessed, || {
        format!(
            "SI vs winkler: {:?}, witnesses {:?}",
            r.verdict, r.witnesses
        )
    })
}

fn ac4_si_witnesses() -> Outcome {
    let (f0, f1) = fixture_example_uniform(0.2).map_err(|e| e.to_string())?;
    si_path(&f0, &f1, iv(0.0, 1.0), iv(0.0, 2.0)).map_err(|e| format!("example: {e}"))?;
    let (b, eps) = (1.0, 0.5);
    let c = condition1_instance(0.2, b, eps).map_err(|e| e.to_string())?;
    let stretched = c.stretched().map_err(|e| e.to_string())?;
    si_path(&c.f, &stretched, iv(0.0, b), iv(0.0, b + 0.5 * eps))
        .map_err(|e| format!("condition: {e}"))
}

fn ac5_discrete_cxls_star() -> Outcome {
    let p = DiscreteExample::default();
    let (f0, f1) = fixture_example_discrete(&p).map_err(|e| e.to_string())?;
    let s0 = si(&f0, p.alpha).map_err(|e| e.to_string())?.intervals();
    let s1 = si(&f1, p.alpha).map_err(|e| e.to_string())?.intervals();
    let strict_subset = s1.len() < s0.len() && s1.iter().all(|a| s0.iter().any(|b| a.approx_eq(b)));
    ensure(strict_subset, || {
        format!("si(F1) {s1:?} is not a strict subset of si(F0) {s0:?}")
    })?;
    for l in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let sl = si(&mix(&f0, &f1, l), p.alpha)
            .map_err(|e| e.to_string())?
            .intervals();
        ensure(same_set(&sl, &s0), || format!("si(F_{l}) = {sl:?}"))?;
    }
    let r = cxls_check(
        Functional::Si { alpha: p.alpha },
        &f0,
        &f1,
        &lambda_grid(99),
    )
    .map_err(|e| e.to_string())?;
    let verdicts: Vec<Verdict> = r.checks.iter().map(|c| c.verdict).collect();
    ensure(verdicts == [Verdict::Pass, Verdict::Fail], || {
        format!("cxls / cxls* verdicts {verdicts:?}")
    })
}

fn ac6_gci_level_sets() -> Outcome {
    let alpha = 0.2;
    let g = fixture_gci_cxls(alpha).map_err(|e| e.to_string())?;
    let shared = |f: &Distribution| {
        is_gci(f, alpha, &g.shared)
            && gci(f, alpha)
                .map(|r| r.contains(&g.shared))
                .unwrap_or(false)
    };
    ensure(shared(&g.f0) && shared(&g.f1), || {
        format!("{} is not shared", g.shared)
    })?;
    let r = cxls_check(Functional::Gci { alpha }, &g.f0, &g.f1, &lambda_grid(99))
        .map_err(|e| e.to_string())?;
    let star = &r.checks[1];
    ensure(
        star.verdict == Verdict::Fail && !star.witnesses.is_empty(),
        || format!("cxls* verdict {:?}", star.verdict),
    )
}

fn ac7_mixture_identity() -> Outcome {
    let n = 50;
    let pts: Vec<f64> = (0..n)
        .map(|i| -4.0 + 8.0 * i as f64 / (n - 1) as f64)
        .collect();
    let instances = random_symmetric_step_scores(SEED, 20);
    ensure(instances.len() == 20, || "instance count".into())?;
    for (k, s) in instances.iter().enumerate() {
        for (ia, &a) in pts.iter().enumerate() {
            for &b in &pts[ia + 1..] {
                let r = iv(a, b);
                for &y in &pts {
                    let d = (s.eti.evaluate(&r, y) - s.mixture.evaluate(&r, y)).abs();
                    ensure(d <= 1e-10, || {
                        format!("instance {k}: [{a},{b}], y={y}: defect {d}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn ac8_property_suite() -> Outcome {
    let winkler = ScoreSpec::Winkler { alpha: 0.2 };
    for p in [
        ScoreProperty::Translation,
        ScoreProperty::Homogeneity,
        ScoreProperty::Symmetry,
    ] {
        let r = score_property_check(&winkler, p, 10_000, SEED).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Pass, || {
            format!("winkler {p:?}: {:?}", r.witnesses)
        })?;
    }
    let cube = MonotoneFunction::cubic(1.0).map_err(|e| e.to_string())?;
    let cubic = ScoreSpec::EtiFamily {
        alpha: 0.2,
        w1: 1.0,
        w2: 1.0,
        g1: cube.clone(),
        g2: cube,
    };
    for p in [ScoreProperty::Translation, ScoreProperty::Homogeneity] {
        let r = score_property_check(&cubic, p, 10_000, SEED).map_err(|e| e.to_string())?;
        ensure(
            r.verdict == Verdict::Fail && !r.witnesses.is_empty(),
            || format!("cubic {p:?}: {:?}", r.verdict),
        )?;
    }
    Ok(())
}

fn ac9_mi_consistency() -> Outcome {
    let points = ReportGrid::integer_points(0, 10);
    for fx in random_discrete(SEED, 100) {
        let Distribution::Discrete(d) = &fx.dist else {
            return Err("discrete fixture expected".into());
        };
        for k in 0..=2u64 {
            let found = brute_force_minimizers(&fx.dist, &ScoreSpec::K01 { k }, &points)
                .map_err(|e| e.to_string())?;
            let mut lows: Vec<u64> = found.iter().map(|i| i.lower() as u64).collect();
            lows.sort_unstable();
            let truth = mi_lower_discrete(d, k);
            ensure(lows == truth, || {
                format!("{} k={k}: argmin {lows:?} vs {truth:?}", fx.id)
            })?;
        }
    }
    for fx in random_piecewise_uniform(SEED, 20) {
        let hi = fx.dist.support_hull().1;
        for c in [0.25, 0.5] {
            let truth = mi_mid_continuous(&fx.dist, c).map_err(|e| e.to_string())?;
            let mut xs: Vec<f64> = (0..)
                .map(|i| -c + 0.05 * i as f64)
                .take_while(|x| *x <= hi + c + 1e-12)
                .collect();
            for r in &truth.ranges {
                xs.extend([r.lo, r.hi]);
            }
            let grid = ReportGrid::points_on(xs);
            let found = brute_force_minimizers(&fx.dist, &ScoreSpec::C01 { c }, &grid)
                .map_err(|e| e.to_string())?;
            for x in grid.candidates() {
                let is_min = found.iter().any(|m| m.approx_eq(x));
                ensure(is_min == truth.contains(x.midpoint()), || {
                    format!(
                        "{} c={c}: midpoint {} minimizer={is_min}",
                        fx.id,
                        x.midpoint()
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn ac10_monte_carlo() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let discrete = random_discrete(SEED, 10);
    let continuous = random_piecewise_uniform(SEED, 10);
    for t in 0..20 {
        let alpha = rng.random_range(0.05..0.5);
        let (f, report, score) = if t % 2 == 0 {
            let f = discrete[t / 2].dist.clone();
            let a = rng.random_range(0..8u32) as f64;
            let b = a + rng.random_range(0..4u32) as f64;
            let score = match t % 6 {
                0 => ScoreSpec::Winkler { alpha },
                2 => ScoreSpec::EtiFamily {
                    alpha,
                    w1: 1.0,
                    w2: 1.0,
                    g1: nonlinear_g(),
                    g2: nonlinear_g(),
                },
                _ => ScoreSpec::K01 { k: (b - a) as u64 },
            };
            let report = if score.is_point_score() {
                Interval::point(a)
            } else {
                iv(a, b)
            };
            (f, report, score)
        } else {
            let f = continuous[t / 2].dist.clone();
            let (lo, hi) = f.support_hull();
            let a = rng.random_range(lo..hi);
            let b = rng.random_range(a..hi + 1.0);
            let score = match t % 6 {
                1 => ScoreSpec::ElementarySymmetric {
                    alpha,
                    theta: rng.random_range(lo..hi),
                },
                3 => ScoreSpec::Quantile {
                    alpha,
                    g: MonotoneFunction::cubic(1.0).unwrap(),
                },
                _ => ScoreSpec::C01 {
                    c: rng.random_range(0.1..1.0),
                },
            };
            let report = if score.is_point_score() {
                Interval::point(a)
            } else {
                iv(a, b)
            };
            (f, report, score)
        };
        let exact = expected_score(&f, &score, &report).map_err(|e| e.to_string())?;
        let (mean, se) = sample_mean(&f, &score, &report, SEED + t as u64, 1_000_000)
            .map_err(|e| e.to_string())?;
        let ok = if se == 0.0 {
            (exact - mean).abs() <= 1e-9
        } else {
            (exact - mean).abs() <= 3.0 * se
        };
        ensure(ok, || {
            format!(
                "triple {t} ({} on {report}): exact {exact}, sample {mean} ± {se}",
                score.name()
            )
        })?;
    }
    Ok(())
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: "AC1",
            name: "four-member ETI table",
            limit: Some(Duration::from_secs(1)),
            run: ac1_table1,
        },
        Criterion {
            id: "AC2",
            name: "ETI strict consistency",
            limit: Some(Duration::from_secs(10)),
            run: ac2_eti_consistency,
        },
        Criterion {
            id: "AC3",
            name: "quantile score consistency",
            limit: None,
            run: ac3_quantile_consistency,
        },
        Criterion {
            id: "AC4",
            name: "SI non-elicitability witnesses",
            limit: None,
            run: ac4_si_witnesses,
        },
        Criterion {
            id: "AC5",
            name: "discrete CxLS* failure",
            limit: None,
            run: ac5_discrete_cxls_star,
        },
        Criterion {
            id: "AC6",
            name: "GCI level-set failure",
            limit: None,
            run: ac6_gci_level_sets,
        },
        Criterion {
            id: "AC7",
            name: "symmetric mixture identity",
            limit: None,
            run: ac7_mixture_identity,
        },
        Criterion {
            id: "AC8",
            name: "interval score property suite",
            limit: None,
            run: ac8_property_suite,
        },
        Criterion {
            id: "AC9",
            name: "MI strict consistency",
            limit: None,
            run: ac9_mi_consistency,
        },
        Criterion {
            id: "AC10",
            name: "exact vs Monte Carlo expectation",
            limit: Some(Duration::from_secs(30)),
            run: ac10_monte_carlo,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| match c.limit {
            Some(limit) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            _ => Ok(()),
        });
        match outcome {
            Ok(()) => println!("PASS {:<5} {} ({elapsed:.2?})", c.id, c.name),
            Err(e) => {
                failed += 1;
                println!("FAIL {:<5} {} ({elapsed:.2?}): {e}", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
