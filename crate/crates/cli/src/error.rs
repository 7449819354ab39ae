use std::path::PathBuf;

use nbse::NbseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: NbseError,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn stage(stage: &'static str) -> impl FnOnce(NbseError) -> Self {
        move |source| Self::Stage { stage, source }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }

    /// 2 config, 3 no transition, 4 solver failure, 5 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Io { .. } => 5,
            Self::Stage { source, .. } => match source {
                NbseError::InvalidInput(_) | NbseError::DimensionMismatch { .. } => 2,
                NbseError::NoTransition { .. } => 3,
                NbseError::NonConvergence { .. }
                | NbseError::Overflow { .. }
                | NbseError::GirthNotMet { .. }
                | NbseError::SizeCap { .. } => 4,
                NbseError::Parse { .. } | NbseError::Io(_) => 5,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
