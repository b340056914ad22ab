use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::functionals::Interval;

use super::ScoreSpec;

/// Three-point Gauss-Legendre rule on [-1, 1]; exact for polynomials up to
/// degree five. Its nodes are interior, so jumps at sub-interval ends never
/// get evaluated.
const GL_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Exact `E_F S(report, Y)`.
///
/// Discrete laws sum over atoms. For piecewise-uniform laws each piece is
/// cut at the score's kinks; on every cut the integrand is a polynomial of
/// degree at most three, which the Gauss-Legendre rule integrates exactly.
pub fn expected_score(f: &Distribution, score: &ScoreSpec, report: &Interval) -> Result<f64> {
    match f {
        Distribution::Discrete(d) => {
            if !report.is_integral() {
                return Err(Error::ReportOutsideDomain {
                    lower: report.lower(),
                    upper: report.upper(),
                });
            }
            Ok(d.support()
                .iter()
                .zip(d.probs())
                .map(|(&y, &p)| p * score.evaluate(report, y as f64))
                .sum())
        }
        Distribution::PiecewiseUniform(p) => {
            let kinks = score.kinks(report);
            let b = p.breakpoints();
            let mut total = 0.0;
            for (i, &mass) in p.masses().iter().enumerate() {
                if mass == 0.0 {
                    continue;
                }
                let (lo, hi) = (b[i], b[i + 1]);
                let density = p.density(i);
                let mut cuts = vec![lo];
                cuts.extend(kinks.iter().copied().filter(|&k| k > lo && k < hi));
                cuts.push(hi);
                for w in cuts.windows(2) {
                    let half = 0.5 * (w[1] - w[0]);
                    let mid = 0.5 * (w[1] + w[0]);
                    let piece: f64 = GL_NODES
                        .iter()
                        .zip(GL_WEIGHTS)
                        .map(|(&t, wt)| wt * score.evaluate(report, mid + half * t))
                        .sum();
                    total += density * half * piece;
                }
            }
            Ok(total)
        }
    }
}

/// Monte Carlo mean and its standard error from `n` seeded draws.
pub fn sample_mean(
    f: &Distribution,
    score: &ScoreSpec,
    report: &Interval,
    seed: u64,
    n: usize,
) -> Result<(f64, f64)> {
    let draws = f.sample(seed, n)?;
    let values: Vec<f64> = draws.iter().map(|&y| score.evaluate(report, y)).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}
