use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("probability `{name}` = {value} is outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("probabilities of `{what}` sum to {sum}, expected 1")]
    BadSum { what: &'static str, sum: f64 },

    #[error("payoff for {0} is not finite")]
    NonFinitePayoff(&'static str),

    #[error("incompatible data{}: {reason}", group.as_ref().map(|g| format!(" in group `{g}`")).unwrap_or_default())]
    IncompatibleData { group: Option<String>, reason: String },

    #[error("no grid point matches the data (incompatible data or grid too coarse)")]
    NoFeasiblePoint,

    #[error("grid step {0} must lie in (0, 0.1]")]
    InvalidGridStep(f64),

    #[error("invalid study: {0}")]
    InvalidStudy(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("at `{path}`: {message}")]
    Schema { path: String, message: String },
}

impl Error {
    pub(crate) fn incompatible(reason: impl Into<String>) -> Self {
        Error::IncompatibleData {
            group: None,
            reason: reason.into(),
        }
    }

    /// Attaches a group label to an [`Error::IncompatibleData`]; other
    /// variants pass through unchanged.
    pub fn in_group(self, id: &str) -> Self {
        match self {
            Error::IncompatibleData { reason, .. } => Error::IncompatibleData {
                group: Some(id.to_owned()),
                reason,
            },
            other => other,
        }
    }
}
