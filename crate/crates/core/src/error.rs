use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A payoff ordering required by the declared game class does not hold.
    #[error("{class} ordering violated: {inequality} fails")]
    OrderingViolation {
        class: &'static str,
        inequality: &'static str,
    },

    #[error("game `{0}` is not symmetric")]
    NotSymmetric(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("expected a unique pure equilibrium, found {found}")]
    NoUniqueEquilibrium { found: usize },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),

    #[error("infeasible zero-determinant specification: {0}")]
    Infeasible(String),

    /// The joint chain has more than one closed communicating class.
    #[error("joint chain is not ergodic ({recurrent_classes} recurrent classes)")]
    NotErgodic { recurrent_classes: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
