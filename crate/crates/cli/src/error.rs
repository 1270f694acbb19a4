use std::io;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Library(#[from] langevin_kit::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Error record printed on stderr before a nonzero exit.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub message: String,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use langevin_kit::Error as E;
        match self {
            Self::Read { .. } | Self::Write { .. } => "io",
            Self::Config(_) => "config",
            Self::Library(E::Infeasible { .. }) => "infeasible",
            Self::Library(E::StepHypothesis(_)) => "hypothesis",
            Self::Library(E::InvalidConstants(_) | E::InvalidParameter(_) | E::DimensionMismatch { .. } | E::Data(_)) => {
                "config"
            }
            Self::Library(_) => "runtime",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" => 2,
            "hypothesis" => 3,
            "infeasible" => 4,
            "io" => 5,
            _ => 1,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            error: self.kind(),
            message: self.to_string(),
        }
    }
}
