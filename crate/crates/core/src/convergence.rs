//! Conditioning i.i.d. draws on their empirical mean, computed exactly by
//! convolution, and compared against the relative entropy projection of the
//! base law onto the same mean.

use serde::Serialize;

use crate::dist::{Distribution, DistributionDoc};
use crate::error::{Error, Result};
use crate::solver::{solve_mre, ConstraintSet, SolverOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub draws: usize,
    pub sum_target: i64,
    pub conditional_marginal: Distribution,
    pub maxent_dist: Distribution,
    pub tv_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub base: Distribution,
    pub mean_target: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn gaps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.tv_gap).collect()
    }

    pub fn to_doc(&self) -> ConvergenceDoc {
        ConvergenceDoc {
            base: self.base.to_doc(),
            mean_target: self.mean_target,
            rows: self
                .rows
                .iter()
                .map(|r| RowDoc {
                    n: r.draws,
                    sum_target: r.sum_target,
                    conditional_marginal: r.conditional_marginal.to_doc(),
                    maxent: r.maxent_dist.to_doc(),
                    tv_gap: r.tv_gap,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceDoc {
    pub base: DistributionDoc,
    pub mean_target: f64,
    pub rows: Vec<RowDoc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RowDoc {
    #[serde(rename = "N")]
    pub n: usize,
    pub sum_target: i64,
    pub conditional_marginal: DistributionDoc,
    pub maxent: DistributionDoc,
    pub tv_gap: f64,
}

/// Integer values of the labels.
pub fn integer_values(d: &Distribution) -> Result<Vec<i64>> {
    d.space()
        .labels()
        .iter()
        .map(|l| l.trim().parse().map_err(|_| Error::NonIntegerLabel(l.clone())))
        .collect()
}

/// Law of `X_1 + … + X_draws` for i.i.d. draws from `(values, weights)`,
/// indexed from `draws · min(values)`. Each convolution level is rescaled to
/// unit mass; only ratios within a level are used.
fn convolve(values: &[i64], weights: &[f64], min: i64, span: usize, draws: usize) -> Vec<f64> {
    let mut law = vec![1.0];
    for _ in 0..draws {
        let mut next = vec![0.0; law.len() + span];
        for (s, &p) in law.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (&v, &w) in values.iter().zip(weights) {
                next[s + (v - min) as usize] += p * w;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        law = next;
    }
    law
}

/// `P(X_1 = v | X_1 + … + X_N = sum_target) = base(v) · C_{N−1}(s − v) / C_N(s)`.
pub fn conditional_marginal(base: &Distribution, draws: usize, sum_target: i64) -> Result<Distribution> {
    if draws == 0 {
        return Err(Error::InvalidArgument("need at least one draw".into()));
    }
    let all_values = integer_values(base)?;
    let support = base.support();
    let values: Vec<i64> = support.iter().map(|&i| all_values[i]).collect();
    let weights: Vec<f64> = support.iter().map(|&i| base.weights()[i]).collect();
    let min = *values.iter().min().expect("distribution has support");
    let max = *values.iter().max().expect("distribution has support");
    let span = (max - min) as usize;

    let rest = convolve(&values, &weights, min, span, draws - 1);
    let rest_min = (draws as i64 - 1) * min;
    let numerators: Vec<f64> = all_values
        .iter()
        .zip(base.weights())
        .map(|(&v, &w)| {
            if w == 0.0 {
                return 0.0;
            }
            let offset = sum_target - v - rest_min;
            if offset < 0 || offset as usize >= rest.len() {
                0.0
            } else {
                w * rest[offset as usize]
            }
        })
        .collect();
    if numerators.iter().all(|&x| x == 0.0) {
        return Err(Error::UnachievableSum {
            draws,
            target: sum_target,
        });
    }
    Distribution::new(base.space().clone(), numerators)
}

/// One row per entry of `draw_counts`, sorted ascending. Each row conditions
/// on `round(mean_target · N)` and projects the base onto the realized
/// empirical mean `sum_target / N`.
pub fn convergence_experiment(
    base: &Distribution,
    mean_target: f64,
    draw_counts: &[usize],
    opts: &SolverOptions,
) -> Result<ConvergenceReport> {
    let values = integer_values(base)?;
    let coeffs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let mut draw_counts = draw_counts.to_vec();
    draw_counts.sort_unstable();
    draw_counts.dedup();
    let mut rows = Vec::with_capacity(draw_counts.len());
    for n in draw_counts {
        let sum_target = (mean_target * n as f64).round() as i64;
        let conditional = conditional_marginal(base, n, sum_target)?;
        let constraints = ConstraintSet::new(base.space().clone())
            .with_moment(coeffs.clone(), sum_target as f64 / n as f64)?;
        let maxent = solve_mre(base, &constraints, opts)?.posterior;
        let tv_gap = conditional.tv_distance(&maxent)?;
        rows.push(ConvergenceRow {
            draws: n,
            sum_target,
            conditional_marginal: conditional,
            maxent_dist: maxent,
            tv_gap,
        });
    }
    Ok(ConvergenceReport {
        base: base.clone(),
        mean_target,
        rows,
    })
}
