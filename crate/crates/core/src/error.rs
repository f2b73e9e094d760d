use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("integration blew up at t = {time}: non-finite state")]
    IntegrationBlowup { time: f64 },

    #[error("brute-force oracle refused: series length {n} exceeds guard {limit}")]
    OracleGuard { n: usize, limit: usize },

    #[error(
        "filtration would exceed the simplex budget of {budget}; lower r_max (currently {r_max}) or the number of trajectories"
    )]
    SimplexBudget { budget: usize, r_max: f64 },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// True for errors caused by bad user input or configuration, as opposed
    /// to runtime failures.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Json(_) => true,
            Error::Stage { source, .. } => source.is_usage(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
