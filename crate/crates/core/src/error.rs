use std::path::PathBuf;

use thiserror::Error;

use crate::grid::{BranchId, BusId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to load {path}: {message}")]
    Parse { path: PathBuf, message: String },

    /// Every invariant violation found in a case, not just the first.
    #[error("invalid network case: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("HVDC link on branch {branch} is degenerate: R_cr + R_L - R_ci = {denominator}")]
    DegenerateLink { branch: BranchId, denominator: f64 },

    #[error("island with reference bus {reference_bus} is singular (relative residual {residual:e})")]
    SingularIsland { reference_bus: BusId, residual: f64 },

    #[error("cascading step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("branch {0} does not exist")]
    UnknownBranch(BranchId),

    #[error("disturbed branch {0} is already out of service")]
    DisturbedBranchSevered(BranchId),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Newton iteration made no progress after {iterations} iterations (residual {residual:e})")]
    NoProgress { iterations: usize, residual: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 for bad input or configuration, 2 when a
    /// simulation or solver fails.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularIsland { .. } | Error::AtStep { .. } | Error::NoProgress { .. } | Error::NonFinite(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep {
                step,
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
