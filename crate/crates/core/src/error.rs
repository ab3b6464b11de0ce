use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid step distribution: {0}")]
    InvalidDistribution(String),

    #[error("cannot parse distribution spec `{spec}`: {reason}")]
    ParseDistribution { spec: String, reason: String },

    /// Assumption (A3) fails: no positive root of t·Λ'(t) − Λ(t) = log 2.
    #[error("Assumption (A3) violated: sup of t·Λ'(t) − Λ(t) is {g_sup}, needs to exceed log 2")]
    A3Violated { g_sup: f64 },

    #[error("no bracket for t* after {doublings} doublings")]
    NoBracket { doublings: u32 },

    #[error("populations are not stochastically ordered")]
    OrderViolated,

    #[error("trajectory was recorded without step instrumentation")]
    MissingStepLog,

    #[error("increment {increment} at index {index} exceeds the bound K = {bound}")]
    StepBoundViolated {
        index: usize,
        increment: f64,
        bound: f64,
    },

    #[error("unsupported distribution for this operation: {0}")]
    UnsupportedDistribution(String),

    #[error("offspring law binomial(2, {q}) is not supercritical")]
    SubcriticalOffspring { q: f64 },

    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("non-positive gap {gap} at control value {control}")]
    NonPositiveGap { control: f64, gap: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl Error {
    /// True for errors caused by the caller's input rather than by a failed run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDistribution(_)
                | Error::ParseDistribution { .. }
                | Error::A3Violated { .. }
                | Error::UnsupportedDistribution(_)
                | Error::SubcriticalOffspring { .. }
                | Error::InsufficientData { .. }
                | Error::InvalidParameter { .. }
                | Error::StepBoundViolated { .. }
                | Error::OrderViolated
        )
    }
}
