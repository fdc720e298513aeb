//! Conditioning on hard evidence, computed both by the closed-form ratio
//! `p(A_i ∧ B) / p(B)` and by the relative entropy solver with the
//! complement of `B` pinned to zero.

use crate::dist::{Distribution, Event, OutcomeSpace};
use crate::error::{Error, Result};
use crate::measures::relative_entropy;
use crate::solver::{solve_mre, ConstraintSet, SolverOptions};

/// A prior over joint propositions together with the hypothesis partition.
///
/// Joint labels follow the convention `"A1&B"` / `"A1&~B"`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPrior {
    joint: Distribution,
    hypotheses: OutcomeSpace,
    cells: Vec<Vec<usize>>,
}

impl JointPrior {
    /// `partition` maps each hypothesis label to its joint labels; the cells
    /// must cover the joint space exactly once.
    pub fn new<S: AsRef<str>>(joint: Distribution, partition: &[(S, Vec<S>)]) -> Result<Self> {
        let hypotheses = OutcomeSpace::new(partition.iter().map(|(h, _)| h.as_ref().to_string()))?;
        let mut owner: Vec<Option<usize>> = vec![None; joint.len()];
        let mut cells = Vec::with_capacity(partition.len());
        for (h, (name, members)) in partition.iter().enumerate() {
            let mut cell = Vec::with_capacity(members.len());
            for label in members {
                let i = joint.space().index_of(label.as_ref())?;
                if let Some(prev) = owner[i] {
                    return Err(Error::InvalidPartition(format!(
                        "`{}` belongs to both `{}` and `{}`",
                        label.as_ref(),
                        hypotheses.labels()[prev],
                        name.as_ref()
                    )));
                }
                owner[i] = Some(h);
                cell.push(i);
            }
            cells.push(cell);
        }
        if let Some(i) = owner.iter().position(Option::is_none) {
            return Err(Error::InvalidPartition(format!(
                "`{}` is not assigned to any hypothesis",
                joint.space().labels()[i]
            )));
        }
        Ok(Self {
            joint,
            hypotheses,
            cells,
        })
    }

    /// Builds the `2n`-cell joint `Ai&B`, `Ai&~B` from per-hypothesis masses.
    /// Masses are normalized jointly.
    pub fn from_table<S: AsRef<str>>(hypotheses: &[S], with_b: &[f64], without_b: &[f64]) -> Result<Self> {
        let n = hypotheses.len();
        for len in [with_b.len(), without_b.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: len,
                });
            }
        }
        let mut labels = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        let mut partition = Vec::with_capacity(n);
        for (h, (&pb, &pnb)) in hypotheses.iter().zip(with_b.iter().zip(without_b)) {
            let h = h.as_ref();
            let cell = vec![format!("{h}&B"), format!("{h}&~B")];
            labels.extend(cell.iter().cloned());
            weights.extend([pb, pnb]);
            partition.push((h.to_string(), cell));
        }
        Self::new(Distribution::from_labels(labels, weights)?, &partition)
    }

    pub fn joint(&self) -> &Distribution {
        &self.joint
    }

    pub fn hypotheses(&self) -> &OutcomeSpace {
        &self.hypotheses
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Joint cells whose `&`-separated label parts include `name`,
    /// e.g. `evidence("B")` selects every `Ai&B`.
    pub fn evidence(&self, name: &str) -> Event {
        let mask = self
            .joint
            .space()
            .labels()
            .iter()
            .map(|l| l.split('&').any(|part| part == name))
            .collect();
        Event::from_mask(self.joint.space().clone(), mask).expect("mask matches space")
    }

    pub fn marginalize(&self, d: &Distribution) -> Result<Distribution> {
        d.space().ensure_same(self.joint.space())?;
        d.marginalize(&self.cells, self.hypotheses.clone())
    }

    /// Prior over hypotheses.
    pub fn marginal(&self) -> Distribution {
        self.marginalize(&self.joint)
            .expect("joint lives on its own space")
    }
}

/// `q(A_i | B) = p(A_i ∧ B) / p(B)`.
pub fn bayes_closed_form(joint: &JointPrior, evidence: &Event) -> Result<Distribution> {
    let p = joint.joint();
    let p_b = p.mass(evidence)?;
    if p_b <= 0.0 {
        return Err(Error::ZeroProbabilityEvent { step: None });
    }
    let weights = joint
        .cells()
        .iter()
        .map(|cell| {
            cell.iter()
                .filter(|&&i| evidence.contains(i))
                .map(|&i| p.weights()[i])
                .sum::<f64>()
                / p_b
        })
        .collect();
    Distribution::new(joint.hypotheses().clone(), weights)
}

/// Minimizes relative entropy over the joint space with every cell outside
/// the evidence forced to zero, then sums back onto the hypotheses.
pub fn bayes_via_mre(joint: &JointPrior, evidence: &Event, opts: &SolverOptions) -> Result<Distribution> {
    if joint.joint().mass(evidence)? <= 0.0 {
        return Err(Error::ZeroProbabilityEvent { step: None });
    }
    let constraints = ConstraintSet::new(joint.joint().space().clone()).with_zeros(evidence.complement())?;
    let solution = solve_mre(joint.joint(), &constraints, opts)?;
    joint.marginalize(&solution.posterior)
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateStep {
    pub evidence: Event,
    pub posterior: Distribution,
    /// `H(posterior; previous)`.
    pub step_kl: f64,
}

/// Result of conditioning on a sequence of events.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateChain {
    pub prior: Distribution,
    pub steps: Vec<UpdateStep>,
}

impl UpdateChain {
    pub fn final_posterior(&self) -> &Distribution {
        self.steps.last().map_or(&self.prior, |s| &s.posterior)
    }

    pub fn total_step_kl(&self) -> f64 {
        self.steps.iter().map(|s| s.step_kl).sum()
    }

    /// `H(final; prior)` in one jump.
    pub fn direct_kl(&self) -> f64 {
        relative_entropy(self.final_posterior(), &self.prior)
            .expect("chain shares one space")
            .value()
    }
}

/// Conditions `prior` on each evidence in turn.
///
/// Fails at the first step whose running intersection has zero mass.
pub fn sequential_update(prior: &Distribution, evidences: &[Event]) -> Result<UpdateChain> {
    let mut steps: Vec<UpdateStep> = Vec::with_capacity(evidences.len());
    for (step, evidence) in evidences.iter().enumerate() {
        let previous = steps.last().map_or(prior, |s| &s.posterior);
        let posterior = match previous.restrict(evidence) {
            Err(Error::ZeroProbabilityEvent { .. }) => {
                return Err(Error::ZeroProbabilityEvent { step: Some(step) })
            }
            other => other?,
        };
        let step_kl = relative_entropy(&posterior, previous)?.value();
        steps.push(UpdateStep {
            evidence: evidence.clone(),
            posterior,
            step_kl,
        });
    }
    Ok(UpdateChain {
        prior: prior.clone(),
        steps,
    })
}
