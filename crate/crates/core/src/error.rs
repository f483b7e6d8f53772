use std::path::PathBuf;

use thiserror::Error;

use crate::bandit::ArmId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid normalization bounds: r_max ({r_max}) must exceed r_min ({r_min})")]
    InvalidBounds { r_min: f64, r_max: f64 },

    #[error("arm {0:?} has been eliminated and cannot be pulled")]
    EliminatedArm(ArmId),

    #[error("episode budget of {horizon} exhausted")]
    RunComplete { horizon: u32 },

    #[error("mean of an empty history is undefined")]
    EmptyHistory,

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("forecaster training diverged (non-finite loss) after re-initialisation")]
    TrainingDiverged,

    #[error("mean-reward curve for arm {arm} is not non-decreasing at pull {index}")]
    NonMonotoneCurve { arm: usize, index: usize },

    #[error("cannot step a finished episode")]
    EpisodeFinished,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("config file not found: {}", .0.display())]
    ConfigNotFound(PathBuf),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors caused by a bad configuration rather than a failure
    /// while running. The CLI maps these to exit code 1.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidBounds { .. } | Error::Config(_) | Error::ConfigNotFound(_)
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
