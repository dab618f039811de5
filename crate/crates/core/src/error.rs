use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A two-sided mechanism was handed a profile without item preferences.
    #[error("{0} requires item-side preferences (an `@items` section)")]
    MissingItemPrefs(String),

    #[error("n = {n} exceeds the enumeration limit of {limit}")]
    LimitExceeded { n: usize, limit: usize },

    #[error("unknown mechanism `{0}`")]
    UnknownMechanism(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("trace replay diverged at event {index}: {message}")]
    Replay { index: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
