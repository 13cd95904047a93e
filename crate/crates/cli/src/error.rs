use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

use ptwalk::WalkError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Walk(#[from] WalkError),

    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Walk(e) => match e {
                WalkError::InvalidParameter(_) => "invalid-parameter",
                WalkError::InvalidState(_) => "invalid-state",
                WalkError::Degenerate { .. } => "degenerate",
                WalkError::NoExceptionalPoint(_) => "no-exceptional-point",
                WalkError::BoundaryOverflow { .. } => "boundary-overflow",
                WalkError::SolverFailure { .. } => "solver-failure",
                WalkError::SingularEigenvalue(_) => "singular-eigenvalue",
                WalkError::Unclassified { .. } => "unclassified",
            },
        }
    }

    /// 2 for bad input, 1 for failures during the computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => 2,
            CliError::Walk(WalkError::InvalidParameter(_)) => 2,
            CliError::Walk(_) | CliError::Io { .. } => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::Config { path, .. } = self {
            body["path"] = json!(path);
        }
        json!({ "error": body })
    }
}
