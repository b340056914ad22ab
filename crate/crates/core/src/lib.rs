//! Interval forecasts as functionals of a predictive distribution.
//!
//! The crate computes equal-tailed, shortest, modal and guaranteed-coverage
//! intervals of exactly represented laws (finite discrete laws on the
//! nonnegative integers and piecewise-uniform densities), evaluates the
//! consistent scoring functions for those intervals, and ships a small lab
//! that checks consistency and level-set properties by brute force.
//!
//! Layout:
//!
//! - [`distributions`]: exact laws, mixtures and location-scale maps
//! - [`functionals`]: ETI, GCI, SI and MI solution sets
//! - [`scoring`]: pointwise scores and exact expected scores
//! - [`lab`]: brute-force minimizers, level-set checks, fixtures, experiments
//! - [`io`]: JSON / CSV formats and batch evaluation of forecast cases

pub mod distributions;
pub mod error;
pub mod functionals;
pub mod io;
pub mod lab;
pub mod scoring;

pub use distributions::{DiscreteDist, Distribution, PiecewiseUniformDist};
pub use error::{Error, Result};
pub use functionals::{ClosedRange, FunctionalResult, Interval, IntervalFamily};
pub use scoring::{MonotoneFunction, ScoreSpec};

/// Tolerance for set membership and equality of probabilities and lengths.
pub const TAU_CMP: f64 = 1e-9;
/// Tolerance for mass normalization checks.
pub const TAU_MASS: f64 = 1e-9;
/// Shrink amount used when probing minimality of shortest intervals.
pub const TAU_LEN: f64 = 1e-6;
/// Tie tolerance for brute-force argmin sets.
pub const TAU_ARGMIN: f64 = 1e-9;
/// Smallest expected-score gap that counts as a genuine inconsistency.
pub const FAIL_GAP: f64 = 1e-6;
