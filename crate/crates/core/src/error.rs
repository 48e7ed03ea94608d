use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("infeasible moments: variance {sigma2} must be below mu(1-mu) = {limit}")]
    InfeasibleMoments { sigma2: f64, limit: f64 },

    #[error("step size {step} exceeds the support maximum {p_max}")]
    DegenerateStep { step: f64, p_max: f64 },

    #[error("sequences use different step sizes ({0} vs {1})")]
    IncompatibleSequences(f64, f64),

    #[error("profile is missing season {season}, hour {hour}")]
    IncompleteProfile { season: usize, hour: usize },

    #[error("network topology: {0}")]
    Topology(String),

    #[error("power flow did not converge after {iterations} sweeps (last voltage change {residual:.3e} pu)")]
    Divergence { iterations: usize, residual: f64 },

    #[error("genome encoding: {0}")]
    Encoding(String),

    #[error("population is empty")]
    EmptyPopulation,

    #[error("unknown bus {0}")]
    UnknownBus(usize),

    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// A single validation problem, addressed by its dotted key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {}: {}", i.key, i.message))
        .collect::<Vec<_>>()
        .join("\n")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
