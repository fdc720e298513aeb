//! Minimum relative entropy inference on finite discrete distributions.
//!
//! A prior is updated to the posterior closest to it in relative entropy
//! among all distributions meeting the stated constraints. The same
//! projection reproduces conditioning on hard evidence ([`bayes`]), the
//! maximum entropy distribution under a uniform prior ([`maxent`]) and
//! maximum likelihood fitting ([`mle`]).

pub mod bayes;
pub mod cli;
pub mod convergence;
pub mod dist;
pub mod error;
pub mod maxent;
pub mod measures;
pub mod mle;
pub mod solver;

pub use bayes::{bayes_closed_form, bayes_via_mre, sequential_update, JointPrior, UpdateChain, UpdateStep};
pub use convergence::{conditional_marginal, convergence_experiment, ConvergenceReport, ConvergenceRow};
pub use dist::{
    make_distribution, restrict, tv_distance, Distribution, DistributionDoc, Event, OutcomeSpace,
};
pub use error::{Error, Result};
pub use maxent::{indifference_prior, maxent};
pub use measures::{information_gain, relative_entropy, shannon_entropy, ExtendedReal};
pub use mle::{
    empirical_kl, log_likelihood, mle_fit, Bound, Dataset, Family, MleReport, ModelRegistry, ParametricModel,
};
pub use solver::{
    check_feasibility, dual_gradient, dual_objective, exponential_tilt, solve_mre, ConstraintSet,
    FeasibilityReport, MomentStatus, MreSolution, SolverOptions,
};
