use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by field evaluation, integration, and the run harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("light-cone root not bracketed within history horizon {horizon} (field time {field_time})")]
    Horizon { horizon: f64, field_time: f64 },

    #[error("field point lies on the source worldline (separation {separation:e})")]
    Singularity { separation: f64 },

    #[error("point-split limit did not converge: estimates {estimates:?}")]
    NumericalLimit { estimates: Vec<f64> },

    #[error("waveform iteration did not converge after {iterations} iterations; residuals {residuals:?}")]
    Convergence { iterations: usize, residuals: Vec<f64> },

    #[error("{}", format_parse(.path, .line, .message))]
    Parse {
        path: Option<PathBuf>,
        line: Option<usize>,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

fn format_parse(path: &Option<PathBuf>, line: &Option<usize>, message: &str) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!("{}:{}: {}", p.display(), l, message),
        (Some(p), None) => format!("{}: {}", p.display(), message),
        (None, Some(l)) => format!("line {}: {}", l, message),
        (None, None) => message.to_string(),
    }
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code used by the CLI; also recorded in run manifests.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 64,
            Error::Parse { .. } => 65,
            Error::Domain(_) => 66,
            Error::Convergence { .. } => 70,
            Error::Horizon { .. } => 71,
            Error::Singularity { .. } => 72,
            Error::NumericalLimit { .. } => 73,
            Error::Io(_) | Error::Json(_) => 74,
        }
    }

    /// Stable machine-readable identifier for manifests.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Usage(_) => "usage",
            Error::Horizon { .. } => "horizon",
            Error::Singularity { .. } => "singularity",
            Error::NumericalLimit { .. } => "numerical-limit",
            Error::Convergence { .. } => "convergence",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
