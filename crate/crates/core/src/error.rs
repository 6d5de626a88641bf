use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value (grid, generator, experiment) is unusable.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violates the operation's domain.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// The requested operation is not defined for this predictor or score.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A documented precondition does not hold for the given data.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An algorithm entry contract (bracketing invariant) does not hold.
    #[error("contract violated: {0}")]
    Contract(String),

    /// Failure reported by an external model or score callback.
    #[error("callback failed: {0}")]
    Callback(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
