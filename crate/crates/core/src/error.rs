use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the formula it feeds.
    #[error("invalid `{field}`: {reason}")]
    Domain { field: &'static str, reason: String },

    /// A closed-form expression would divide by zero.
    #[error("degenerate instance: {0}")]
    Degenerate(&'static str),

    /// Every link capacity must be strictly positive for the rate-equality
    /// classification to apply.
    #[error("link `{0}` has zero capacity; the positivity hypothesis fails")]
    Hypothesis(&'static str),

    /// The product condition `c01*c02 = c13*c23` does not hold.
    #[error("product condition fails: c01*c02 = {lhs}, c13*c23 = {rhs}")]
    Condition { lhs: f64, rhs: f64 },

    #[error("no equal-rate case applies to this instance")]
    NoCase,

    #[error("time-sharing vector is infeasible: {0}")]
    Infeasible(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Achievable rate exceeded the cut-set bound. Always a solver bug.
    #[error("achievable rate {r_sr} exceeds cut-set bound {bound}")]
    NegativeGap { r_sr: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            field,
            reason: reason.into(),
        }
    }
}
