use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// A configuration problem located by its field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigIssue {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", format_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{0}")]
    Invariant(scolab::Error),

    #[error("{0}")]
    Lab(scolab::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

fn format_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config(vec![ConfigIssue::new(path, message)])
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for configuration errors, 3 for invariant violations, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            _ => 1,
        }
    }

    /// Seed of the replication that broke an invariant.
    pub fn violating_seed(&self) -> Option<u64> {
        match self {
            CliError::Invariant(scolab::Error::InvariantViolation { seed, .. }) => Some(*seed),
            _ => None,
        }
    }
}

impl From<scolab::Error> for CliError {
    fn from(e: scolab::Error) -> Self {
        match e {
            scolab::Error::InvariantViolation { .. } => CliError::Invariant(e),
            scolab::Error::InvalidParameter { ref name, ref reason } => CliError::config(name.clone(), reason.clone()),
            other => CliError::Lab(other),
        }
    }
}
