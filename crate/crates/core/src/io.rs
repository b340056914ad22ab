//! JSON and CSV formats, and batch evaluation of forecast cases.

use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::functionals::Interval;
use crate::scoring::{is_decomposition, ScoreSpec};

/// Serialized form of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistSpec {
    Discrete {
        support: Vec<u64>,
        probs: Vec<f64>,
    },
    PwUniform {
        breakpoints: Vec<f64>,
        masses: Vec<f64>,
    },
    Mixture {
        weights: Vec<f64>,
        components: Vec<DistSpec>,
    },
    LocationScale {
        loc: f64,
        scale: f64,
        base: Box<DistSpec>,
    },
}

impl DistSpec {
    pub fn build(&self) -> Result<Distribution> {
        match self {
            DistSpec::Discrete { support, probs } => {
                Distribution::discrete(support.clone(), probs.clone())
            }
            DistSpec::PwUniform {
                breakpoints,
                masses,
            } => Distribution::piecewise_uniform(breakpoints.clone(), masses.clone()),
            DistSpec::Mixture {
                weights,
                components,
            } => {
                let built = components
                    .iter()
                    .map(DistSpec::build)
                    .collect::<Result<Vec<_>>>()?;
                Distribution::mix(&built, weights)
            }
            DistSpec::LocationScale { loc, scale, base } => {
                base.build()?.location_scale(*loc, *scale)
            }
        }
    }
}

impl From<&Distribution> for DistSpec {
    fn from(d: &Distribution) -> Self {
        match d {
            Distribution::Discrete(d) => DistSpec::Discrete {
                support: d.support().to_vec(),
                probs: d.probs().to_vec(),
            },
            Distribution::PiecewiseUniform(p) => DistSpec::PwUniform {
                breakpoints: p.breakpoints().to_vec(),
                masses: p.masses().to_vec(),
            },
        }
    }
}

pub fn parse_distribution(text: &str) -> Result<Distribution> {
    serde_json::from_str::<DistSpec>(text)?.build()
}

pub fn distribution_to_json(d: &Distribution) -> String {
    serde_json::to_string(&DistSpec::from(d)).expect("plain data serializes")
}

/// One interval forecast and its realized observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub lower: f64,
    pub upper: f64,
    pub observation: f64,
}

impl ForecastCase {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper).expect("validated at parse time")
    }
}

fn csv_err(line: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        line,
        message: message.into(),
    }
}

fn parse_number(field: &str, name: &str, line: u64) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| csv_err(line, format!("{name}: `{field}` is not a decimal number")))?;
    if !v.is_finite() {
        return Err(csv_err(line, format!("{name}: `{field}` is not finite")));
    }
    Ok(v)
}

/// Parses forecast cases from CSV with header `id,lower,upper,observation`
/// (the `id` column is optional).
pub fn parse_forecast_csv(bytes: &[u8]) -> Result<Vec<ForecastCase>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let headers = reader
        .headers()
        .map_err(|e| csv_err(1, e.to_string()))?
        .iter()
        .map(str::trim)
        .collect::<Vec<_>>();
    let with_id = match headers.as_slice() {
        ["id", "lower", "upper", "observation"] => true,
        ["lower", "upper", "observation"] => false,
        [] => return Ok(Vec::new()),
        other => {
            return Err(csv_err(
                1,
                format!(
                    "expected header `id,lower,upper,observation`, got `{}`",
                    other.join(",")
                ),
            ))
        }
    };
    let mut cases = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let offset = usize::from(with_id);
        let id = if with_id {
            Some(record[0].trim().to_string()).filter(|s| !s.is_empty())
        } else {
            None
        };
        let lower = parse_number(&record[offset], "lower", line)?;
        let upper = parse_number(&record[offset + 1], "upper", line)?;
        let observation = parse_number(&record[offset + 2], "observation", line)?;
        if lower > upper {
            let who = id
                .as_deref()
                .map_or(String::new(), |s| format!("case `{s}`: "));
            return Err(csv_err(
                line,
                format!("{who}lower {lower} exceeds upper {upper}"),
            ));
        }
        cases.push(ForecastCase {
            id,
            lower,
            upper,
            observation,
        });
    }
    Ok(cases)
}

/// Canonical CSV: the `id` column appears iff some case has an id, numbers
/// use the shortest round-trip decimal form, lines end in `\n`.
pub fn write_forecast_csv(cases: &[ForecastCase]) -> String {
    let with_id = cases.iter().any(|c| c.id.is_some());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let write = |w: &mut csv::Writer<Vec<u8>>, row: Vec<String>| {
        w.write_record(&row).expect("in-memory write");
    };
    let header = ["id", "lower", "upper", "observation"];
    write(
        &mut w,
        header[usize::from(!with_id)..]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for c in cases {
        let mut row = Vec::with_capacity(4);
        if with_id {
            row.push(c.id.clone().unwrap_or_default());
        }
        row.extend([c.lower, c.upper, c.observation].map(|v| v.to_string()));
        write(&mut w, row);
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseScore {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecasterReport {
    pub name: String,
    pub cases: usize,
    pub mean_score: f64,
    /// Winkler decomposition means; present for the Winkler score only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_penalty: Option<f64>,
    pub scores: Vec<CaseScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub score: ScoreSpec,
    pub forecasters: Vec<ForecasterReport>,
    /// Forecaster names by ascending mean score.
    pub ranking: Vec<String>,
}

/// Order-independent mean: summation over the sorted values.
fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn evaluate_cases(name: &str, cases: &[ForecastCase], score: &ScoreSpec) -> ForecasterReport {
    let scores: Vec<CaseScore> = cases
        .iter()
        .map(|c| CaseScore {
            id: c.id.clone(),
            score: score.evaluate(&c.interval(), c.observation),
        })
        .collect();
    let (mean_length, mean_penalty) = match score {
        ScoreSpec::Winkler { alpha } => {
            let parts: Vec<(f64, f64)> = cases
                .iter()
                .map(|c| is_decomposition(*alpha, &c.interval(), c.observation))
                .collect();
            (
                Some(mean(parts.iter().map(|p| p.0))),
                Some(mean(parts.iter().map(|p| p.1))),
            )
        }
        _ => (None, None),
    };
    ForecasterReport {
        name: name.to_string(),
        cases: cases.len(),
        mean_score: mean(scores.iter().map(|s| s.score)),
        mean_length,
        mean_penalty,
        scores,
    }
}

/// Scores several forecasters and ranks them by mean score (ties by name).
pub fn evaluate_forecasters(
    forecasters: &[(String, Vec<ForecastCase>)],
    score: &ScoreSpec,
) -> EvaluationReport {
    let reports: Vec<ForecasterReport> = forecasters
        .iter()
        .map(|(name, cases)| evaluate_cases(name, cases, score))
        .collect();
    let mut order: Vec<&ForecasterReport> = reports.iter().collect();
    order.sort_by(|a, b| {
        a.mean_score
            .total_cmp(&b.mean_score)
            .then(a.name.cmp(&b.name))
    });
    EvaluationReport {
        score: score.clone(),
        ranking: order.iter().map(|r| r.name.clone()).collect(),
        forecasters: reports,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{eti, FunctionalResult};
    use proptest::prelude::*;

    #[test]
    fn csv_examples() {
        let cases = parse_forecast_csv(b"id,lower,upper,observation\nc1,1,2,0\n").unwrap();
        assert_eq!(
            cases,
            vec![ForecastCase {
                id: Some("c1".into()),
                lower: 1.0,
                upper: 2.0,
                observation: 0.0
            }]
        );
        assert!(parse_forecast_csv(b"id,lower,upper,observation\n")
            .unwrap()
            .is_empty());
        assert!(parse_forecast_csv(b"lower,upper,observation\n")
            .unwrap()
            .is_empty());
        let no_id = parse_forecast_csv(b"lower,upper,observation\n0.5,1.5,1\n").unwrap();
        assert_eq!(no_id[0].id, None);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err =
            parse_forecast_csv(b"id,lower,upper,observation\nc1,1,2,0\nc2,3,2,0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("line 3:"), "{msg}");
        assert!(msg.contains("c2"), "{msg}");

        let err = parse_forecast_csv(b"id,lower,upper,observation\nc1,1,x,0\n").unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let err = parse_forecast_csv(b"id,lower,upper,observation\nc1,1,2\n").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 2, .. }), "{err}");
        assert!(parse_forecast_csv(b"id,lower,upper,observation\nc1,1,inf,0\n").is_err());
        assert!(parse_forecast_csv(b"id,lower,upper,observation\nc1,\"1,000\",2000,0\n").is_err());
        assert!(parse_forecast_csv(b"a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn canonical_csv_is_byte_stable() {
        for text in [
            "id,lower,upper,observation\nc1,1,2,0\nc2,-0.5,3.25,10\n",
            "lower,upper,observation\n0.1,0.9,0.3\n",
        ] {
            let cases = parse_forecast_csv(text.as_bytes()).unwrap();
            assert_eq!(write_forecast_csv(&cases), text);
        }
    }

    #[test]
    fn evaluation_examples() {
        let w = ScoreSpec::Winkler { alpha: 0.2 };
        let one = parse_forecast_csv(b"id,lower,upper,observation\nc1,1,2,0\n").unwrap();
        let r = evaluate_cases("a", &one, &w);
        assert!((r.mean_score - 11.0).abs() < 1e-12);

        let inside = parse_forecast_csv(b"lower,upper,observation\n0,1,0.5\n2,5,3\n").unwrap();
        let r = evaluate_cases("b", &inside, &w);
        assert_eq!(r.mean_length, Some(2.0));
        assert_eq!(r.mean_penalty, Some(0.0));
        assert_eq!(r.mean_score, 2.0);

        let report = evaluate_forecasters(&[("a".into(), one), ("b".into(), inside)], &w);
        assert_eq!(report.ranking, vec!["b".to_string(), "a".to_string()]);
    }

    #[test]
    fn distribution_json() {
        let d = parse_distribution(
            r#"{"kind":"discrete","support":[0,1,2,3],"probs":[0.1,0.4,0.4,0.1]}"#,
        )
        .unwrap();
        assert_eq!(d.cdf(1.0), 0.5);
        let m = parse_distribution(
            r#"{"kind":"mixture","weights":[0.5,0.5],"components":[
                {"kind":"pw_uniform","breakpoints":[0,1],"masses":[1]},
                {"kind":"location_scale","loc":1,"scale":1,"base":{"kind":"pw_uniform","breakpoints":[0,1],"masses":[1]}}]}"#,
        )
        .unwrap();
        for x in [0.0, 0.3, 1.0, 1.7, 2.0] {
            assert!((m.cdf(x) - x / 2.0).abs() < 1e-12);
        }
        assert!(parse_distribution(r#"{"kind":"discrete","support":[0],"probs":[0.5]}"#).is_err());
        assert!(parse_distribution(r#"{"kind":"gamma"}"#).is_err());
    }

    #[test]
    fn functional_result_json_shape() {
        let g = parse_distribution(
            r#"{"kind":"discrete","support":[0,1,2,3],"probs":[0.1,0.4,0.4,0.1]}"#,
        )
        .unwrap();
        let r = eti(&g, 0.2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["families"].as_array().unwrap().len(), 4);
        assert_eq!(
            v["families"][0]["lower_range"],
            serde_json::json!([0.0, 0.0])
        );
        let back: FunctionalResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    fn arb_case() -> impl Strategy<Value = ForecastCase> {
        (
            prop::option::of("[a-z][a-z0-9_]{0,6}"),
            -1e6f64..1e6,
            0.0f64..1e3,
            -1e6f64..1e6,
        )
            .prop_map(|(id, lower, width, observation)| ForecastCase {
                id,
                lower,
                upper: lower + width,
                observation,
            })
    }

    proptest! {
        #[test]
        fn csv_round_trip(cases in prop::collection::vec(arb_case(), 0..20)) {
            let text = write_forecast_csv(&cases);
            let mut back = parse_forecast_csv(text.as_bytes()).unwrap();
            if cases.iter().any(|c| c.id.is_some()) {
                prop_assert_eq!(&back, &cases);
            } else {
                back.iter_mut().for_each(|c| c.id = None);
                prop_assert_eq!(&back, &cases);
            }
            prop_assert_eq!(write_forecast_csv(&back), text);
        }

        #[test]
        fn distribution_spec_round_trip(
            probs in prop::collection::vec(1u32..50, 1..8),
            widths in prop::collection::vec((1u32..20, 0u32..10), 1..6),
        ) {
            let total: u32 = probs.iter().sum();
            let d = Distribution::discrete(
                (0..probs.len() as u64).map(|x| 2 * x).collect(),
                probs.iter().map(|&p| p as f64 / total as f64).collect(),
            ).unwrap();
            let back = parse_distribution(&distribution_to_json(&d)).unwrap();
            prop_assert_eq!(back, d);

            if widths.iter().any(|w| w.1 > 0) {
                let total: u32 = widths.iter().map(|w| w.1).sum();
                let mut b = vec![0.0];
                for (w, _) in &widths {
                    b.push(b[b.len() - 1] + *w as f64 * 0.1);
                }
                let m = widths.iter().map(|w| w.1 as f64 / total as f64).collect();
                let p = Distribution::piecewise_uniform(b, m).unwrap();
                prop_assert_eq!(parse_distribution(&distribution_to_json(&p)).unwrap(), p);
            }
        }

        #[test]
        fn mean_is_permutation_invariant(
            cases in prop::collection::vec(arb_case(), 1..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let w = ScoreSpec::Winkler { alpha: 0.1 };
            let mut shuffled = cases.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = evaluate_cases("x", &cases, &w);
            let b = evaluate_cases("x", &shuffled, &w);
            prop_assert_eq!(a.mean_score, b.mean_score);
            let direct = a.scores.iter().map(|s| s.score).sum::<f64>() / a.cases as f64;
            prop_assert!((a.mean_score - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        }

        #[test]
        fn score_spec_round_trip(alpha in 0.01f64..0.99, k in 0u64..5, c in 0.01f64..3.0) {
            for s in [
                ScoreSpec::Winkler { alpha },
                ScoreSpec::K01 { k },
                ScoreSpec::C01 { c },
                ScoreSpec::ElementarySymmetric { alpha, theta: c },
            ] {
                let back = ScoreSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
                prop_assert_eq!(back, s);
            }
        }
    }
}
