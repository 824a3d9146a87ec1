use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("coincident points: {0} distance is zero")]
    CoincidentPoints(&'static str),

    #[error("BER is undefined for the no-transmission mode (rate 0)")]
    ZeroRateMode,

    #[error("unservable link: zero effective gain needs infinite power")]
    UnservableLink,

    #[error("exhaustive search too large: {0} candidate allocations (limit {1})")]
    SearchTooLarge(f64, f64),

    #[error("non-finite gradient rejected")]
    NonFiniteGradient,

    #[error("non-finite critic loss rejected")]
    NonFiniteLoss,

    #[error("network architecture mismatch: {0}")]
    Architecture(String),

    #[error("replay buffer holds {stored} transitions, batch needs {requested}")]
    Underfilled { stored: usize, requested: usize },

    #[error("training diverged at episode {episode}, step {step}: {what}")]
    Divergence {
        episode: usize,
        step: usize,
        what: String,
    },

    #[error("malformed checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
