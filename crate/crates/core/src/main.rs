use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ivscore::functionals::{eti, gci, mi, si};
use ivscore::io::{
    evaluate_forecasters, parse_distribution, parse_forecast_csv, DistSpec, EvaluationReport,
};
use ivscore::lab::fixtures::{named_fixture, FIXTURES};
use ivscore::lab::{run_experiment, Verdict, EXPERIMENTS};
use ivscore::ScoreSpec;

#[derive(Parser)]
#[command(
    name = "iv",
    version,
    about = "Interval forecast functionals, scores and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score interval forecasts against observations.
    Score {
        /// Forecast CSV (`id,lower,upper,observation`); repeat to compare forecasters.
        #[arg(long = "cases", required = true)]
        cases: Vec<PathBuf>,
        /// Score spec, inline JSON or a path to a JSON file; repeat to average
        /// several scores.
        #[arg(long = "score", required = true)]
        score: Vec<String>,
        /// Weights for averaging several scores (default equal).
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Compute an interval functional of a distribution.
    #[command(group(ArgGroup::new("level").required(true).args(["alpha", "c"])))]
    Functional {
        /// Distribution spec JSON file.
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run a named lab experiment.
    Lab {
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// List experiments and shipped fixtures.
    Fixtures {
        /// Print experiment and fixture names (the default).
        #[arg(long)]
        list: bool,
        /// Print a shipped fixture as a distribution spec.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Eti,
    Si,
    Mi,
    Gci,
}

/// Failure that maps to exit code 1 rather than 2.
#[derive(Debug)]
struct UnexpectedVerdict(Verdict);

impl std::fmt::Display for UnexpectedVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "experiment verdict: {:?}", self.0)
    }
}

impl std::error::Error for UnexpectedVerdict {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UnexpectedVerdict>() => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("IV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("IV_THREADS must be a nonnegative integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score {
            cases,
            score,
            weights,
            out,
        } => cmd_score(&cases, &score, weights, &out),
        Command::Functional {
            dist,
            which,
            alpha,
            c,
            out,
        } => cmd_functional(&dist, which, alpha, c, &out),
        Command::Lab {
            experiment,
            seed,
            out,
        } => {
            if !EXPERIMENTS.contains(&experiment.as_str()) {
                bail!(
                    "unknown experiment `{experiment}`; expected one of {}",
                    EXPERIMENTS.join(", ")
                );
            }
            let report = run_experiment(&experiment, seed)?;
            write_json(&out, &report)?;
            match report.verdict {
                Verdict::Pass => Ok(()),
                v => Err(UnexpectedVerdict(v).into()),
            }
        }
        Command::Fixtures { show, .. } => {
            if let Some(name) = show {
                let d = named_fixture(&name)?;
                return write_json("-", &DistSpec::from(&d));
            }
            println!("experiments:");
            EXPERIMENTS.iter().for_each(|e| println!("  {e}"));
            println!("fixtures:");
            FIXTURES.iter().for_each(|f| println!("  {f}"));
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_json<T: Serialize>(out: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if out == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(out, text).with_context(|| format!("writing {out}"))
    }
}

fn load_score(arg: &str) -> Result<ScoreSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    Ok(ScoreSpec::from_json(&text)?)
}

#[derive(Serialize)]
struct Aggregate {
    weights: Vec<f64>,
    mean_scores: BTreeMap<String, f64>,
    ranking: Vec<String>,
}

#[derive(Serialize)]
struct MultiReport {
    reports: Vec<EvaluationReport>,
    aggregate: Aggregate,
}

fn cmd_score(
    paths: &[PathBuf],
    scores: &[String],
    weights: Option<Vec<f64>>,
    out: &str,
) -> Result<()> {
    let specs = scores
        .iter()
        .map(|s| load_score(s))
        .collect::<Result<Vec<_>>>()?;
    let weights = match weights {
        Some(w) if w.len() != specs.len() => {
            bail!("{} weights given for {} scores", w.len(), specs.len())
        }
        Some(w)
            if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || w.iter().sum::<f64>() <= 0.0 =>
        {
            bail!("weights must be nonnegative with a positive sum")
        }
        Some(w) => w,
        None => vec![1.0; specs.len()],
    };

    let mut forecasters = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let cases = parse_forecast_csv(&bytes).with_context(|| path.display().to_string())?;
        forecasters.push((forecaster_name(path, paths), cases));
    }

    let reports: Vec<EvaluationReport> = specs
        .iter()
        .map(|s| evaluate_forecasters(&forecasters, s))
        .collect();
    if reports.len() == 1 {
        return write_json(out, &reports[0]);
    }
    let total: f64 = weights.iter().sum();
    let mut mean_scores = BTreeMap::new();
    for (name, _) in &forecasters {
        let m = reports
            .iter()
            .zip(&weights)
            .map(|(r, w)| {
                let f = r
                    .forecasters
                    .iter()
                    .find(|f| &f.name == name)
                    .expect("same forecasters");
                w * f.mean_score
            })
            .sum::<f64>()
            / total;
        mean_scores.insert(name.clone(), m);
    }
    let mut ranking: Vec<String> = mean_scores.keys().cloned().collect();
    ranking.sort_by(|a, b| mean_scores[a].total_cmp(&mean_scores[b]).then(a.cmp(b)));
    write_json(
        out,
        &MultiReport {
            reports,
            aggregate: Aggregate {
                weights,
                mean_scores,
                ranking,
            },
        },
    )
}

/// File stem, or the full path when stems collide.
fn forecaster_name(path: &Path, all: &[PathBuf]) -> String {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned());
    let own = stem(path);
    let clash = all.iter().filter(|p| stem(p) == own).count() > 1;
    match own {
        Some(s) if !clash => s,
        _ => path.display().to_string(),
    }
}

fn cmd_functional(
    path: &Path,
    which: Which,
    alpha: Option<f64>,
    c: Option<f64>,
    out: &str,
) -> Result<()> {
    let level = match (which, alpha, c) {
        (Which::Mi, None, Some(c)) => c,
        (Which::Mi, Some(_), _) => bail!("--which mi takes --c, not --alpha"),
        (_, Some(a), None) => a,
        (_, _, Some(_)) => bail!("--c applies to --which mi only; use --alpha"),
        _ => bail!("exactly one of --alpha or --c is required"),
    };
    let dist = parse_distribution(&read(path)?).with_context(|| path.display().to_string())?;
    let result = match which {
        Which::Eti => eti(&dist, level),
        Which::Si => si(&dist, level),
        Which::Mi => mi(&dist, level),
        Which::Gci => gci(&dist, level),
    }?;
    write_json(out, &result)
}
