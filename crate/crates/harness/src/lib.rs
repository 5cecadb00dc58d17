//! Instance generation, experiment driver, reports and invariant suites for
//! the `diskroute` command line tool.

use thiserror::Error;

use diskroute_core::{GeomError, InstanceError, RouteError, SchemeError};

pub mod commands;
pub mod generators;
pub mod pairs;
pub mod report;
pub mod verify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("generator `{generator}` produced no connected instance in {attempts} attempts")]
    Disconnected { generator: String, attempts: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scheme was built for instance {expected}, got {found}")]
    HashMismatch { expected: String, found: String },
    #[error("{failed} invariant suite(s) failed")]
    InvariantFailure { failed: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_)
            | HarnessError::Disconnected { .. }
            | HarnessError::HashMismatch { .. }
            | HarnessError::Route(RouteError::CrossComponent { .. } | RouteError::UnknownSite(_)) => EXIT_USAGE,
            HarnessError::Scheme(
                SchemeError::InvalidParameter(_) | SchemeError::UnknownKind(_) | SchemeError::SmallDiameter { .. },
            ) => EXIT_USAGE,
            HarnessError::InvariantFailure { .. } | HarnessError::Route(_) => EXIT_INVARIANT,
            HarnessError::Scheme(SchemeError::Unreachable { .. }) => EXIT_INVARIANT,
            HarnessError::Io { .. }
            | HarnessError::Instance(_)
            | HarnessError::Geom(_)
            | HarnessError::Scheme(_)
            | HarnessError::Csv(_)
            | HarnessError::Json(_) => EXIT_IO,
        }
    }
}
