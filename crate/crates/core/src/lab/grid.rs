use crate::error::{Error, Result};
use crate::functionals::Interval;
use crate::TAU_CMP;

/// Candidate reports searched by the brute-force minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportGrid {
    candidates: Vec<Interval>,
}

impl ReportGrid {
    pub fn new(candidates: Vec<Interval>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(ReportGrid { candidates })
    }

    /// All `[a, b]` with integer `lo <= a <= b <= hi`.
    pub fn integer_intervals(lo: u64, hi: u64) -> Self {
        ReportGrid::intervals_on((lo..=hi).map(|x| x as f64).collect())
    }

    /// All points `[x, x]` with integer `lo <= x <= hi`.
    pub fn integer_points(lo: u64, hi: u64) -> Self {
        ReportGrid::points_on((lo..=hi).map(|x| x as f64).collect())
    }

    /// All intervals whose endpoints both lie in `endpoints`.
    pub fn intervals_on(endpoints: Vec<f64>) -> Self {
        let e = sorted_unique(endpoints);
        let candidates = e
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| {
                e[i..]
                    .iter()
                    .map(move |&b| Interval::new(a, b).expect("sorted endpoints"))
            })
            .collect();
        ReportGrid { candidates }
    }

    pub fn points_on(points: Vec<f64>) -> Self {
        ReportGrid {
            candidates: sorted_unique(points)
                .into_iter()
                .map(Interval::point)
                .collect(),
        }
    }

    pub fn candidates(&self) -> &[Interval] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn contains(&self, i: &Interval) -> bool {
        self.candidates.iter().any(|c| c.approx_eq(i))
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= TAU_CMP);
    v
}

/// Recipe for a report grid; uniform grids get the exact solution
/// endpoints injected so that the truth is always searchable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    IntegerIntervals { lo: u64, hi: u64 },
    IntegerPoints { lo: u64, hi: u64 },
    UniformIntervals { lo: f64, hi: f64, step: f64 },
    UniformPoints { lo: f64, hi: f64, step: f64 },
}

impl GridSpec {
    pub fn build(&self, solution_members: &[Interval]) -> ReportGrid {
        match *self {
            GridSpec::IntegerIntervals { lo, hi } => ReportGrid::integer_intervals(lo, hi),
            GridSpec::IntegerPoints { lo, hi } => ReportGrid::integer_points(lo, hi),
            GridSpec::UniformIntervals { lo, hi, step } => {
                let mut e = uniform(lo, hi, step);
                e.extend(solution_members.iter().flat_map(|m| [m.lower(), m.upper()]));
                ReportGrid::intervals_on(e)
            }
            GridSpec::UniformPoints { lo, hi, step } => {
                let mut e = uniform(lo, hi, step);
                e.extend(solution_members.iter().map(|m| m.midpoint()));
                ReportGrid::points_on(e)
            }
        }
    }
}

fn uniform(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + TAU_CMP).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// `n` equispaced interior points `i / (n + 1)`.
pub fn lambda_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}
