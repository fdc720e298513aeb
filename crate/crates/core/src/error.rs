use thiserror::Error;

use crate::mle::MleReport;
use crate::solver::MreSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("outcome space must contain at least one label")]
    EmptySpace,
    #[error("duplicate outcome label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown outcome label `{0}`")]
    UnknownLabel(String),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("weight {value} at index {index} is negative")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weight at index {index} is not finite")]
    NonFiniteWeight { index: usize },
    #[error("weights sum to zero")]
    ZeroTotal,
    #[error("operands live on different outcome spaces")]
    SpaceMismatch,
    #[error("{}", match .step {
        Some(step) => format!("evidence at step {step} has zero probability under the running posterior"),
        None => "cannot condition on an event of zero probability".to_string(),
    })]
    ZeroProbabilityEvent { step: Option<usize> },
    #[error("plausibility {0} must lie in (0, 1]")]
    NonpositivePlausibility(f64),
    #[error("prior assigns no mass outside the excluded outcomes")]
    AllMassExcluded,
    #[error("expected {expected} multipliers, found {found}")]
    MultiplierCount { expected: usize, found: usize },
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("unbounded dual: {0}")]
    UnboundedDual(String),
    #[error("solver did not converge after {} iterations (residual {:e})", .0.iterations, .0.kkt_residual)]
    NotConverged(Box<MreSolution>),
    #[error("partition is invalid: {0}")]
    InvalidPartition(String),
    #[error("parameter vector {0:?} lies outside the model domain")]
    ThetaOutOfDomain(Vec<f64>),
    #[error("dataset must contain at least one observation")]
    EmptyDataset,
    #[error("degenerate data: maximum likelihood lies on the domain boundary at {:?}", .0.theta)]
    DegenerateData(Box<MleReport>),
    #[error("model `{0}` has no fitting procedure")]
    UnsupportedModel(String),
    #[error("label `{0}` is not an integer")]
    NonIntegerLabel(String),
    #[error("sum {target} cannot be reached by {draws} draws from the base support")]
    UnachievableSum { draws: usize, target: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that describe an ill-posed problem rather than malformed input.
    pub fn is_problem_failure(&self) -> bool {
        matches!(
            self,
            Error::ZeroProbabilityEvent { .. }
                | Error::AllMassExcluded
                | Error::Infeasible(_)
                | Error::UnboundedDual(_)
                | Error::NotConverged(_)
                | Error::DegenerateData(_)
                | Error::UnachievableSum { .. }
        )
    }
}
