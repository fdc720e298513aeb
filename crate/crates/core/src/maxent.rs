//! Maximum entropy as the minimum relative entropy update of the uniform prior.

use crate::dist::{Distribution, OutcomeSpace};
use crate::error::Result;
use crate::solver::{solve_mre, ConstraintSet, MreSolution, SolverOptions};

/// Uniform prior, each weight exactly `1/n`.
pub fn indifference_prior(space: OutcomeSpace) -> Distribution {
    let n = space.len();
    Distribution::from_normalized(space, vec![1.0 / n as f64; n])
}

/// `solve_mre(indifference_prior(space), constraints)`; the posterior
/// maximizes Shannon entropy over the feasible set.
pub fn maxent(constraints: &ConstraintSet, opts: &SolverOptions) -> Result<MreSolution> {
    let prior = indifference_prior(constraints.space().clone());
    solve_mre(&prior, constraints, opts)
}
