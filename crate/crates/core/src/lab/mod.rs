//! Brute-force verification of consistency and level-set properties.

mod checks;
mod experiments;
pub mod fixtures;
mod grid;

pub use checks::{
    brute_force_minimizers, consistency_check, cxls_check, expected_scores, mixture_identity_check,
    prop2_witness_check, score_property_check, ScoreProperty,
};
pub use experiments::{run_experiment, EXPERIMENTS};
pub use grid::{lambda_grid, GridSpec, ReportGrid};

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::functionals::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A distribution with a stable identifier used in reports.
#[derive(Debug, Clone)]
pub struct NamedDist {
    pub id: String,
    pub dist: Distribution,
}

impl NamedDist {
    pub fn new(id: impl Into<String>, dist: Distribution) -> Self {
        NamedDist {
            id: id.into(),
            dist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub fixture: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observation: Option<f64>,
    /// Expected-score gap (or identity defect for property checks).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Witness {
    pub fn new(fixture: impl Into<String>) -> Self {
        Witness {
            fixture: fixture.into(),
            report: None,
            observation: None,
            gap: None,
            note: None,
        }
    }

    pub fn report(mut self, r: Interval) -> Self {
        self.report = Some(r);
        self
    }

    pub fn gap(mut self, g: f64) -> Self {
        self.gap = Some(g);
        self
    }

    pub fn observation(mut self, y: f64) -> Self {
        self.observation = Some(y);
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }
}

/// Functional value at one point of a mixture path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub members: Vec<Interval>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cxls: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cxls_star: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0_in: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_in: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub experiment: String,
    pub verdict: Verdict,
    /// Verdict the check is supposed to reach; `None` means pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<LabReport>,
    #[serde(default)]
    pub witnesses: Vec<Witness>,
    #[serde(default)]
    pub lambda_trace: Vec<LambdaPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl LabReport {
    pub fn new(name: impl Into<String>, verdict: Verdict) -> Self {
        LabReport {
            experiment: name.into(),
            verdict,
            expected: None,
            checks: Vec::new(),
            witnesses: Vec::new(),
            lambda_trace: Vec::new(),
            details: None,
        }
    }

    /// Pass when `ok`, otherwise fail with the given witness.
    pub fn assertion(name: impl Into<String>, ok: bool, witness: impl FnOnce() -> Witness) -> Self {
        let mut r = LabReport::new(name, if ok { Verdict::Pass } else { Verdict::Fail });
        if !ok {
            r.witnesses.push(witness());
        }
        r
    }

    pub fn expecting(mut self, v: Verdict) -> Self {
        self.expected = Some(v);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.experiment = name.into();
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = Some(details);
        self
    }

    pub fn expected_verdict(&self) -> Verdict {
        self.expected.unwrap_or(Verdict::Pass)
    }

    pub fn as_expected(&self) -> bool {
        self.verdict == self.expected_verdict()
    }

    /// Bundles checks into one report: pass iff every check reached its
    /// expected verdict.
    pub fn combine(name: impl Into<String>, checks: Vec<LabReport>) -> Self {
        let mut out = LabReport::new(name, Verdict::Pass);
        for c in &checks {
            if c.as_expected() {
                continue;
            }
            if c.verdict == Verdict::Inconclusive && out.verdict == Verdict::Pass {
                out.verdict = Verdict::Inconclusive;
            } else if c.verdict != Verdict::Inconclusive {
                out.verdict = Verdict::Fail;
            }
            out.witnesses
                .push(Witness::new(c.experiment.clone()).note(format!(
                    "expected {:?}, got {:?}",
                    c.expected_verdict(),
                    c.verdict
                )));
            out.witnesses.extend(c.witnesses.iter().cloned());
        }
        out.checks = checks;
        out
    }
}
