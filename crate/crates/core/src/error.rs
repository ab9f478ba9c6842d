use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A configuration or argument value outside its domain.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// A placement matrix that breaks the per-RRH cache constraint or shape.
    #[error("placement violates {constraint}: {detail}")]
    Placement { constraint: &'static str, detail: String },

    #[error("index {index} out of range 1..={len} for {what}")]
    OutOfRange { what: &'static str, index: usize, len: usize },

    /// The user sits exactly on an RRH; the path-loss model diverges there.
    #[error("user location coincides with RRH {rrh}")]
    Colocated { rrh: usize },

    #[error("ill-conditioned pole spectrum: rates {a} and {b} should have been merged")]
    IllConditioned { a: f64, b: f64 },

    #[error("search space of {count:.3e} placements ({reduced:.3e} after restricting to the top files) exceeds budget {budget:.3e}")]
    BudgetExceeded { count: f64, reduced: f64, budget: f64 },

    #[error("no crossover: {0}")]
    NoCrossover(String),

    #[error("scenario parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid { field: field.into(), reason: reason.into() }
    }

    /// Stable snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Invalid { .. } => "invalid",
            Error::Placement { .. } => "placement",
            Error::OutOfRange { .. } => "out_of_range",
            Error::Colocated { .. } => "colocated",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NoCrossover(_) => "no_crossover",
            Error::Parse(_) => "parse",
        }
    }
}
