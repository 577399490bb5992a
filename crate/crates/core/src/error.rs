use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid {what}: {reason}")]
    Validation { what: String, reason: String },

    /// Every strength in the topic is zero, so prominence is undefined.
    #[error("degenerate topic: total strength is zero")]
    DegenerateTopic,

    #[error("idea `{id}` cannot be weakened when alpha = 1")]
    InfeasibleWeakening { id: String },

    #[error("unknown idea `{0}`")]
    UnknownIdea(String),

    #[error("{context} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        context: String,
        iterations: usize,
        residual: f64,
        /// Best strength profile seen before giving up, if any.
        best: Option<Vec<f64>>,
    },

    #[error("grid of {cells} cells exceeds the limit of {limit}")]
    GridTooLarge { cells: u128, limit: u128 },
}

impl Error {
    pub(crate) fn validation(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            what: what.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
