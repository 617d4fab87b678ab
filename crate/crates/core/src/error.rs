use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("signal: file not found: {0}")]
    MissingFile(PathBuf),

    #[error("signal: parse error in {path} at {location}: {reason}")]
    Parse {
        path: PathBuf,
        location: String,
        reason: String,
    },

    #[error("signal: non-finite sample in {path} at index {index}")]
    NonFiniteSample { path: PathBuf, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("split: class {0} has no examples")]
    EmptyClass(&'static str),

    #[error("features: signal of {len} samples is shorter than window length {window_len}")]
    SignalTooShort { len: usize, window_len: usize },

    #[error("features: degenerate segment ({reason}){}", location.as_deref().map(|l| format!(" at {l}")).unwrap_or_default())]
    DegenerateSegment {
        reason: &'static str,
        location: Option<String>,
    },

    #[error("features: cannot fit a normalizer on an empty training set")]
    EmptyTrainingSet,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("rl: step called on a finished episode")]
    StepAfterDone,

    #[error("rl: replay buffer holds {size} transitions, batch of {batch_size} requested")]
    NotEnoughExperience { size: usize, batch_size: usize },

    #[error("rl: invalid reward matrix: {0}")]
    InvalidRewardMatrix(String),

    #[error("eval: {actuals} actual labels but {predictions} predictions")]
    LengthMismatch { actuals: usize, predictions: usize },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("config: {0}")]
    Config(String),

    #[error("report: no report.json in {0}")]
    MissingReport(PathBuf),

    #[error("report: {0}")]
    Report(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad user input (configuration or usage)
    /// rather than a failure while running.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParam(_) | Error::Config(_) | Error::InvalidRewardMatrix(_) | Error::ShapeMismatch(_)
        )
    }
}
