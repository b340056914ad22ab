use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("cannot mix discrete and continuous components")]
    KindMismatch,

    #[error("operation requires a {expected} distribution")]
    WrongKind { expected: &'static str },

    #[error("report [{lower}, {upper}] has endpoints outside the observation domain")]
    ReportOutsideDomain { lower: f64, upper: f64 },

    #[error("invalid interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("invalid score: {0}")]
    InvalidScore(String),

    #[error("report grid is empty")]
    EmptyGrid,

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("fixture construction failed: {0}")]
    Fixture(String),

    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that a level lies strictly inside (0, 1).
pub(crate) fn check_level(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
