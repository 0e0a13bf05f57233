use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("link argument range {range} exceeds the linear region [-1/2, 1/2]")]
    DomainExceedsLinearRegion { range: f64 },

    #[error("invalid link: {0}")]
    InvalidLink(String),

    #[error("invalid action set: {0}")]
    InvalidActionSet(String),

    #[error("||theta*|| = {norm} exceeds the bound B = {bound}")]
    InvalidTheta { norm: f64, bound: f64 },

    #[error("action index {index} out of range for {len} actions")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid attack: {0}")]
    InvalidAttack(String),

    #[error("corruption budget violated: {used} flips with budget {budget}")]
    BudgetViolation { used: u64, budget: u64 },

    #[error("MLE did not converge after {iterations} iterations (gradient norm {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("policy requires the sigmoid link")]
    WrongLink,

    #[error("empty input")]
    EmptyInput,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("round {round}: {source}")]
    AtRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_round(self, round: usize) -> Self {
        match self {
            e @ Error::AtRound { .. } => e,
            e => Error::AtRound {
                round,
                source: Box::new(e),
            },
        }
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotPositiveDefinite { .. }
            | Error::NoConvergence { .. }
            | Error::BudgetViolation { .. } => true,
            Error::AtRound { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
