//! Minimum relative entropy projection under normalization, hard-zero and
//! linear moment constraints.
//!
//! The minimizer lies in the exponential tilt family
//! `q_i ∝ p_i · exp(−Σ_j λ_j a_ji)` restricted to the allowed support, so the
//! solver works on the dual `D(λ) = log Z(λ) + λ·b`, which is smooth and
//! convex. Its gradient is `b − E_q[a]` and its Hessian is `Cov_q(a)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::dist::{Distribution, Event, OutcomeSpace};
use crate::error::{Error, Result};
use crate::measures::{relative_entropy, ExtendedReal};

/// `Σ_i coeffs_i q_i = target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moment {
    pub coeffs: Vec<f64>,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    space: OutcomeSpace,
    zeros: Event,
    moments: Vec<Moment>,
}

impl ConstraintSet {
    /// Normalization only.
    pub fn new(space: OutcomeSpace) -> Self {
        let zeros = Event::empty(space.clone());
        Self {
            space,
            zeros,
            moments: Vec::new(),
        }
    }

    pub fn with_zeros(mut self, zeros: Event) -> Result<Self> {
        self.space.ensure_same(zeros.space())?;
        if zeros.is_full() {
            return Err(Error::InvalidArgument(
                "zero set may not cover the whole outcome space".into(),
            ));
        }
        self.zeros = zeros;
        Ok(self)
    }

    pub fn with_zero_labels<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        let zeros = Event::new(self.space.clone(), labels)?;
        self.with_zeros(zeros)
    }

    pub fn with_moment(mut self, coeffs: Vec<f64>, target: f64) -> Result<Self> {
        if coeffs.len() != self.space.len() {
            return Err(Error::LengthMismatch {
                expected: self.space.len(),
                found: coeffs.len(),
            });
        }
        if !target.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(
                "moment coefficients and targets must be finite".into(),
            ));
        }
        self.moments.push(Moment { coeffs, target });
        Ok(self)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn zeros(&self) -> &Event {
        &self.zeros
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    /// Outcomes the posterior may charge: prior-positive and not excluded.
    fn allowed(&self, prior: &Distribution) -> Vec<bool> {
        prior
            .weights()
            .iter()
            .zip(self.zeros.mask())
            .map(|(&w, &zero)| w > 0.0 && !zero)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MreSolution {
    pub posterior: Distribution,
    /// One multiplier per moment, then the normalization multiplier.
    /// A moment whose target sits on the hull boundary carries `±∞`.
    pub multipliers: Vec<f64>,
    pub achieved_kl: ExtendedReal,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Set when some target was boundary-feasible and the solution is the
    /// limiting face distribution.
    pub boundary: bool,
}

impl MreSolution {
    pub fn moment_multipliers(&self) -> &[f64] {
        &self.multipliers[..self.multipliers.len() - 1]
    }

    pub fn normalization_multiplier(&self) -> f64 {
        self.multipliers[self.multipliers.len() - 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentStatus {
    Strict,
    /// Target equals the smallest achievable value.
    BoundaryMin,
    /// Target equals the largest achievable value.
    BoundaryMax,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentFeasibility {
    pub index: usize,
    pub target: f64,
    /// `(min, max)` of `Σ a_i q_i` over allowed outcomes; `None` with no allowed outcome.
    pub hull: Option<(f64, f64)>,
    pub status: MomentStatus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    /// Prior mass outside the excluded outcomes.
    pub allowed_mass: f64,
    pub moments: Vec<MomentFeasibility>,
}

impl FeasibilityReport {
    pub fn has_mass(&self) -> bool {
        self.allowed_mass > 0.0
    }

    pub fn is_feasible(&self) -> bool {
        self.has_mass() && self.moments.iter().all(|m| m.status != MomentStatus::Infeasible)
    }

    pub fn is_strictly_feasible(&self) -> bool {
        self.has_mass() && self.moments.iter().all(|m| m.status == MomentStatus::Strict)
    }

    pub fn is_boundary(&self) -> bool {
        self.is_feasible() && !self.is_strictly_feasible()
    }

    pub fn first_violation(&self) -> Option<&MomentFeasibility> {
        self.moments.iter().find(|m| m.status == MomentStatus::Infeasible)
    }
}

impl fmt::Display for MomentFeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some((min, max)) = self.hull else {
            return write!(f, "moment {}: no allowed outcomes", self.index);
        };
        match self.status {
            MomentStatus::Strict => write!(
                f,
                "moment {}: target {} strictly inside [{min}, {max}]",
                self.index, self.target
            ),
            MomentStatus::BoundaryMin => write!(
                f,
                "moment {}: target {} equals minimum achievable {min} (boundary-feasible)",
                self.index, self.target
            ),
            MomentStatus::BoundaryMax => write!(
                f,
                "moment {}: target {} equals maximum achievable {max} (boundary-feasible)",
                self.index, self.target
            ),
            MomentStatus::Infeasible if self.target > max => write!(
                f,
                "moment {}: target {} exceeds maximum achievable {max}",
                self.index, self.target
            ),
            MomentStatus::Infeasible => write!(
                f,
                "moment {}: target {} is below minimum achievable {min}",
                self.index, self.target
            ),
        }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.has_mass() {
            return f.write_str("prior assigns no mass outside the excluded outcomes");
        }
        let lines: Vec<String> = self.moments.iter().map(|m| m.to_string()).collect();
        if lines.is_empty() {
            f.write_str("feasible: no moment constraints")
        } else {
            f.write_str(&lines.join("; "))
        }
    }
}

/// Slack for deciding that a target sits on a hull endpoint.
fn hull_eps(min: f64, max: f64) -> f64 {
    1e-12 * (1.0 + min.abs().max(max.abs()))
}

fn hull(coeffs: &[f64], allowed: &[bool]) -> Option<(f64, f64)> {
    coeffs
        .iter()
        .zip(allowed)
        .filter(|(_, &ok)| ok)
        .map(|(&a, _)| a)
        .fold(None, |acc, a| match acc {
            None => Some((a, a)),
            Some((lo, hi)) => Some((lo.min(a), hi.max(a))),
        })
}

fn classify(target: f64, hull: Option<(f64, f64)>) -> MomentStatus {
    let Some((min, max)) = hull else {
        return MomentStatus::Infeasible;
    };
    let eps = hull_eps(min, max);
    if target < min - eps || target > max + eps {
        MomentStatus::Infeasible
    } else if (target - min).abs() <= eps {
        MomentStatus::BoundaryMin
    } else if (target - max).abs() <= eps {
        MomentStatus::BoundaryMax
    } else {
        MomentStatus::Strict
    }
}

/// Per-moment diagnostic of whether the constraint set can be met on the
/// prior's support.
pub fn check_feasibility(prior: &Distribution, constraints: &ConstraintSet) -> FeasibilityReport {
    let allowed = if prior.space() == constraints.space() {
        constraints.allowed(prior)
    } else {
        vec![false; prior.len()]
    };
    let allowed_mass = prior
        .weights()
        .iter()
        .zip(&allowed)
        .filter(|(_, &ok)| ok)
        .map(|(w, _)| w)
        .sum();
    let moments = constraints
        .moments
        .iter()
        .enumerate()
        .map(|(index, m)| {
            let hull = hull(&m.coeffs, &allowed);
            MomentFeasibility {
                index,
                target: m.target,
                hull,
                status: classify(m.target, hull),
            }
        })
        .collect();
    FeasibilityReport {
        allowed_mass,
        moments,
    }
}

/// The dual problem restricted to a fixed support and a subset of moments.
struct Reduced {
    support: Vec<usize>,
    log_prior: Vec<f64>,
    /// `rows[j][k]` is the coefficient of moment `j` at `support[k]`.
    rows: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

struct DualPoint {
    value: f64,
    log_z: f64,
    q: Vec<f64>,
    grad: Vec<f64>,
}

impl Reduced {
    fn new(prior: &Distribution, allowed: &[bool], moments: &[&Moment]) -> Self {
        let support: Vec<usize> = (0..allowed.len()).filter(|&i| allowed[i]).collect();
        let log_prior = support.iter().map(|&i| prior.weights()[i].ln()).collect();
        let rows = moments
            .iter()
            .map(|m| support.iter().map(|&i| m.coeffs[i]).collect())
            .collect();
        let targets = moments.iter().map(|m| m.target).collect();
        Self {
            support,
            log_prior,
            rows,
            targets,
        }
    }

    fn eval(&self, lambdas: &[f64]) -> DualPoint {
        let scores: Vec<f64> = (0..self.support.len())
            .map(|k| {
                self.log_prior[k]
                    - self
                        .rows
                        .iter()
                        .zip(lambdas)
                        .map(|(row, l)| l * row[k])
                        .sum::<f64>()
            })
            .collect();
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut q: Vec<f64> = scores.iter().map(|s| (s - top).exp()).collect();
        let z: f64 = q.iter().sum();
        q.iter_mut().for_each(|w| *w /= z);
        let log_z = top + z.ln();
        let grad = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(row, b)| b - row.iter().zip(&q).map(|(a, w)| a * w).sum::<f64>())
            .collect();
        let value = log_z + lambdas.iter().zip(&self.targets).map(|(l, b)| l * b).sum::<f64>();
        DualPoint {
            value,
            log_z,
            q,
            grad,
        }
    }

    fn hessian(&self, q: &[f64]) -> DMatrix<f64> {
        let k = self.rows.len();
        let means: Vec<f64> = self
            .rows
            .iter()
            .map(|row| row.iter().zip(q).map(|(a, w)| a * w).sum())
            .collect();
        DMatrix::from_fn(k, k, |j, l| {
            q.iter()
                .enumerate()
                .map(|(i, w)| w * (self.rows[j][i] - means[j]) * (self.rows[l][i] - means[l]))
                .sum()
        })
    }

    /// Solves `H d = −g`, adding a ridge when `H` is singular.
    fn newton_direction(&self, q: &[f64], grad: &[f64]) -> DVector<f64> {
        let h = self.hessian(q);
        let rhs = -DVector::from_column_slice(grad);
        let scale = 1.0 + h.trace().abs();
        let mut ridge = 0.0;
        loop {
            let mut m = h.clone();
            for i in 0..m.nrows() {
                m[(i, i)] += ridge;
            }
            if let Some(chol) = m.cholesky() {
                let d = chol.solve(&rhs);
                if d.iter().all(|x| x.is_finite()) {
                    return d;
                }
            }
            ridge = if ridge == 0.0 { 1e-12 * scale } else { ridge * 10.0 };
            if ridge > 1e6 * scale {
                // steepest descent
                return rhs;
            }
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Normalized `p_i · exp(−Σ λ_j a_ji)` on prior-positive, non-excluded outcomes.
///
/// An infinite multiplier selects the face where its moment is minimal
/// (`+∞`) or maximal (`−∞`); such multipliers are applied in order before
/// the finite ones.
pub fn exponential_tilt(
    prior: &Distribution,
    constraints: &ConstraintSet,
    lambdas: &[f64],
) -> Result<Distribution> {
    prior.space().ensure_same(constraints.space())?;
    if lambdas.len() != constraints.moments.len() {
        return Err(Error::MultiplierCount {
            expected: constraints.moments.len(),
            found: lambdas.len(),
        });
    }
    if lambdas.iter().any(|l| l.is_nan()) {
        return Err(Error::InvalidArgument("multiplier is NaN".into()));
    }
    let mut allowed = constraints.allowed(prior);
    if !allowed.iter().any(|&a| a) {
        return Err(Error::AllMassExcluded);
    }
    let mut finite = Vec::new();
    let mut finite_lambdas = Vec::new();
    for (m, &l) in constraints.moments.iter().zip(lambdas) {
        if l.is_finite() {
            finite.push(m);
            finite_lambdas.push(l);
            continue;
        }
        let (min, max) = hull(&m.coeffs, &allowed).expect("allowed support is nonempty");
        let (edge, eps) = (if l > 0.0 { min } else { max }, hull_eps(min, max));
        for (ok, a) in allowed.iter_mut().zip(&m.coeffs) {
            *ok = *ok && (a - edge).abs() <= eps;
        }
    }
    let reduced = Reduced::new(prior, &allowed, &finite);
    let point = reduced.eval(&finite_lambdas);
    Ok(expand(prior.space(), &reduced.support, &point.q))
}

fn expand(space: &OutcomeSpace, support: &[usize], q: &[f64]) -> Distribution {
    let mut weights = vec![0.0; space.len()];
    for (&i, &w) in support.iter().zip(q) {
        weights[i] = w;
    }
    Distribution::from_normalized(space.clone(), weights)
}

fn finite_dual(prior: &Distribution, constraints: &ConstraintSet, lambdas: &[f64]) -> Result<DualPoint> {
    prior.space().ensure_same(constraints.space())?;
    if lambdas.len() != constraints.moments.len() {
        return Err(Error::MultiplierCount {
            expected: constraints.moments.len(),
            found: lambdas.len(),
        });
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidArgument(
            "dual evaluation needs finite multipliers".into(),
        ));
    }
    let allowed = constraints.allowed(prior);
    if !allowed.iter().any(|&a| a) {
        return Err(Error::AllMassExcluded);
    }
    let moments: Vec<&Moment> = constraints.moments.iter().collect();
    Ok(Reduced::new(prior, &allowed, &moments).eval(lambdas))
}

/// `log Z(λ) + λ·b`, with `Z` summed over the allowed support.
pub fn dual_objective(prior: &Distribution, constraints: &ConstraintSet, lambdas: &[f64]) -> Result<f64> {
    Ok(finite_dual(prior, constraints, lambdas)?.value)
}

/// Gradient of [`dual_objective`]: `b_j − Σ_i a_ji q_i(λ)`.
pub fn dual_gradient(prior: &Distribution, constraints: &ConstraintSet, lambdas: &[f64]) -> Result<Vec<f64>> {
    Ok(finite_dual(prior, constraints, lambdas)?.grad)
}

/// Multipliers beyond this size mean the dual is running off to −∞.
const DIVERGENCE_BOUND: f64 = 1e8;

/// Minimizes `H(q; prior)` subject to `constraints`.
///
/// Boundary-feasible targets are resolved up front by shrinking the support
/// to the face they force; the remaining moments are fitted by damped Newton
/// on the dual starting from `λ = 0`.
pub fn solve_mre(
    prior: &Distribution,
    constraints: &ConstraintSet,
    opts: &SolverOptions,
) -> Result<MreSolution> {
    prior.space().ensure_same(constraints.space())?;
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let report = check_feasibility(prior, constraints);
    if !report.has_mass() {
        return Err(Error::Infeasible(report.to_string()));
    }
    if let Some(violation) = report.first_violation() {
        return Err(Error::UnboundedDual(violation.to_string()));
    }

    let k = constraints.moments.len();
    let mut allowed = constraints.allowed(prior);
    let mut lambdas = vec![0.0; k];
    let mut settled = vec![false; k];
    let mut boundary = false;
    // Peel off moments pinned to a hull endpoint until none remain.
    loop {
        let mut changed = false;
        for (j, m) in constraints.moments.iter().enumerate() {
            if settled[j] {
                continue;
            }
            let h = hull(&m.coeffs, &allowed);
            let (min, max) = h.expect("allowed support is nonempty");
            let eps = hull_eps(min, max);
            match classify(m.target, h) {
                MomentStatus::Infeasible => {
                    return Err(Error::Infeasible(format!(
                        "moment {j}: target {} lies outside [{min}, {max}] on the face \
                         forced by the other constraints",
                        m.target
                    )));
                }
                _ if max - min <= eps => {
                    // constant on the current support; nothing left to fit
                    settled[j] = true;
                    changed = true;
                }
                MomentStatus::BoundaryMin | MomentStatus::BoundaryMax => {
                    let at_min = classify(m.target, h) == MomentStatus::BoundaryMin;
                    let edge = if at_min { min } else { max };
                    for (ok, a) in allowed.iter_mut().zip(&m.coeffs) {
                        *ok = *ok && (a - edge).abs() <= eps;
                    }
                    lambdas[j] = if at_min { f64::INFINITY } else { f64::NEG_INFINITY };
                    settled[j] = true;
                    boundary = true;
                    changed = true;
                }
                MomentStatus::Strict => {}
            }
        }
        if !changed {
            break;
        }
    }

    let free: Vec<usize> = (0..k).filter(|&j| !settled[j]).collect();
    let free_moments: Vec<&Moment> = free.iter().map(|&j| &constraints.moments[j]).collect();
    let reduced = Reduced::new(prior, &allowed, &free_moments);

    let mut lam = vec![0.0; free.len()];
    let mut point = reduced.eval(&lam);
    let mut iterations = 0;
    // Leave headroom so the full KKT residual below still meets `tol`.
    let target_gap = 0.25 * opts.tol;
    while max_abs(&point.grad) > target_gap && iterations < opts.max_iter {
        let dir = reduced.newton_direction(&point.q, &point.grad);
        let slope: f64 = dir.iter().zip(&point.grad).map(|(d, g)| d * g).sum();
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = lam.iter().zip(dir.iter()).map(|(l, d)| l + step * d).collect();
            let next = reduced.eval(&trial);
            let armijo = next.value <= point.value + 1e-4 * step * slope;
            // near the optimum the decrease drops below rounding of D itself
            let flat = (next.value - point.value).abs() <= 1e-14 * (1.0 + point.value.abs())
                && max_abs(&next.grad) < max_abs(&point.grad);
            if next.value.is_finite() && (armijo || flat) {
                accepted = Some((trial, next));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((trial, next)) = accepted else {
            // no further decrease is representable
            break;
        };
        lam = trial;
        point = next;
        if max_abs(&lam) > DIVERGENCE_BOUND {
            return Err(Error::Infeasible(
                "moment targets are jointly unattainable: dual multipliers diverge".into(),
            ));
        }
    }

    for (&j, &l) in free.iter().zip(&lam) {
        lambdas[j] = l;
    }
    let posterior = expand(prior.space(), &reduced.support, &point.q);
    let normalization = point.log_z - 1.0;

    let kkt_residual = kkt_residual(prior, constraints, &posterior, &reduced, &lam, normalization);
    let achieved_kl = relative_entropy(&posterior, prior)?;
    lambdas.push(normalization);
    let solution = MreSolution {
        posterior,
        multipliers: lambdas,
        achieved_kl,
        kkt_residual,
        iterations,
        boundary,
    };
    if kkt_residual <= opts.tol {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}

/// Max constraint violation plus max violation of
/// `log(q_i/p_i) + 1 + ν + Σ_j λ_j a_ji = 0` over the posterior's support.
fn kkt_residual(
    prior: &Distribution,
    constraints: &ConstraintSet,
    posterior: &Distribution,
    reduced: &Reduced,
    free_lambdas: &[f64],
    normalization: f64,
) -> f64 {
    let q = posterior.weights();
    let mut primal = (q.iter().sum::<f64>() - 1.0).abs();
    for m in &constraints.moments {
        let achieved: f64 = m.coeffs.iter().zip(q).map(|(a, w)| a * w).sum();
        primal = primal.max((achieved - m.target).abs());
    }
    for (i, &zero) in constraints.zeros.mask().iter().enumerate() {
        if zero {
            primal = primal.max(q[i].abs());
        }
    }
    let mut stationarity: f64 = 0.0;
    for (k, &i) in reduced.support.iter().enumerate() {
        if q[i] == 0.0 {
            continue;
        }
        let tilt: f64 = reduced
            .rows
            .iter()
            .zip(free_lambdas)
            .map(|(row, l)| l * row[k])
            .sum();
        let r = (q[i] / prior.weights()[i]).ln() + 1.0 + normalization + tilt;
        stationarity = stationarity.max(r.abs());
    }
    primal + stationarity
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::tv_distance;

    fn dice() -> OutcomeSpace {
        OutcomeSpace::integers(1, 6).unwrap()
    }

    fn uniform_dice() -> Distribution {
        Distribution::new(dice(), vec![1.0; 6]).unwrap()
    }

    fn faces() -> Vec<f64> {
        (1..=6).map(f64::from).collect()
    }

    fn mean(target: f64) -> ConstraintSet {
        ConstraintSet::new(dice()).with_moment(faces(), target).unwrap()
    }

    #[test]
    fn tilt_examples() {
        let prior = Distribution::from_labels(vec!["a", "b", "c"], vec![0.2, 0.3, 0.5]).unwrap();
        let none = ConstraintSet::new(prior.space().clone());
        let q = exponential_tilt(&prior, &none, &[]).unwrap();
        assert!(tv_distance(&q, &prior).unwrap() < 1e-15);

        let q = exponential_tilt(&uniform_dice(), &mean(3.5), &[0.0]).unwrap();
        assert!(tv_distance(&q, &uniform_dice()).unwrap() < 1e-15);

        // weights ∝ e^{−λ a_i} = (1/2, 1/4)
        let two = Distribution::from_labels(vec!["1", "2"], vec![1.0, 1.0]).unwrap();
        let c = ConstraintSet::new(two.space().clone())
            .with_moment(vec![1.0, 2.0], 1.5)
            .unwrap();
        let q = exponential_tilt(&two, &c, &[std::f64::consts::LN_2]).unwrap();
        assert!((q.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((q.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tilt_errors() {
        let prior = Distribution::from_labels(vec!["a", "b"], vec![1.0, 0.0]).unwrap();
        let c = ConstraintSet::new(prior.space().clone())
            .with_zero_labels(&["a"])
            .unwrap();
        assert!(matches!(
            exponential_tilt(&prior, &c, &[]),
            Err(Error::AllMassExcluded)
        ));
        assert!(matches!(
            exponential_tilt(&uniform_dice(), &mean(3.5), &[]),
            Err(Error::MultiplierCount {
                expected: 1,
                found: 0
            })
        ));
    }

    #[test]
    fn infinite_multiplier_selects_face() {
        let q = exponential_tilt(&uniform_dice(), &mean(6.0), &[f64::NEG_INFINITY]).unwrap();
        assert_eq!(q.weights(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let q = exponential_tilt(&uniform_dice(), &mean(1.0), &[f64::INFINITY]).unwrap();
        assert_eq!(q.weights()[0], 1.0);
    }

    #[test]
    fn feasibility_examples() {
        let r = check_feasibility(&uniform_dice(), &mean(7.0));
        assert!(!r.is_feasible());
        assert_eq!(r.moments[0].hull, Some((1.0, 6.0)));
        assert!(r.to_string().contains("exceeds maximum achievable 6"));

        let r = check_feasibility(&uniform_dice(), &mean(6.0));
        assert!(r.is_feasible() && r.is_boundary());
        assert_eq!(r.moments[0].status, MomentStatus::BoundaryMax);

        let r = check_feasibility(&uniform_dice(), &mean(4.5));
        assert!(r.is_strictly_feasible());

        let r = check_feasibility(&uniform_dice(), &mean(0.5));
        assert!(r.to_string().contains("below minimum achievable 1"));
    }

    #[test]
    fn feasibility_respects_zeros_and_prior_support() {
        let prior = Distribution::new(dice(), vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let c = mean(5.5).with_zero_labels(&["1"]).unwrap();
        let r = check_feasibility(&prior, &c);
        assert_eq!(r.moments[0].hull, Some((2.0, 5.0)));
        assert!(!r.is_feasible());
        assert!((r.allowed_mass - 0.8).abs() < 1e-15);
    }

    #[test]
    fn solve_prior_already_satisfies() {
        let sol = solve_mre(&uniform_dice(), &mean(3.5), &SolverOptions::default()).unwrap();
        assert!(tv_distance(&sol.posterior, &uniform_dice()).unwrap() < 1e-12);
        assert!(sol.moment_multipliers()[0].abs() < 1e-12);
        assert!(sol.achieved_kl.value() < 1e-12);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn solve_zero_only_reduces_to_conditioning() {
        let prior = Distribution::from_labels(vec!["a", "b", "c"], vec![0.2, 0.3, 0.5]).unwrap();
        let c = ConstraintSet::new(prior.space().clone())
            .with_zero_labels(&["c"])
            .unwrap();
        let sol = solve_mre(&prior, &c, &SolverOptions::default()).unwrap();
        let w = sol.posterior.weights();
        assert!((w[0] - 0.4).abs() < 1e-12 && (w[1] - 0.6).abs() < 1e-12);
        assert_eq!(w[2].to_bits(), 0f64.to_bits());
        // ν = log p(B) − 1
        assert!((sol.normalization_multiplier() - (0.5f64.ln() - 1.0)).abs() < 1e-12);
        assert!((sol.achieved_kl.value() + 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn solve_dice_mean() {
        let sol = solve_mre(&uniform_dice(), &mean(4.5), &SolverOptions::default()).unwrap();
        // mpmath bisection at 40 digits
        let expected = [
            0.054353167826491515,
            0.07877154563305352,
            0.11415997722944056,
            0.16544680311005333,
            0.2397744404269,
            0.3474940657740611,
        ];
        for (q, e) in sol.posterior.weights().iter().zip(expected) {
            assert!((q - e).abs() < 1e-10, "{q} vs {e}");
        }
        assert!((sol.moment_multipliers()[0] + 0.37104893808103334).abs() < 1e-9);
        assert!((sol.achieved_kl.value() - 0.17817837107422596).abs() < 1e-10);
        assert!(sol.kkt_residual <= 1e-10);
        assert!(!sol.boundary);
    }

    #[test]
    fn solve_errors() {
        let opts = SolverOptions::default();
        assert!(matches!(
            solve_mre(&uniform_dice(), &mean(7.0), &opts),
            Err(Error::UnboundedDual(msg)) if msg.contains("maximum achievable 6")
        ));
        let prior = Distribution::from_labels(vec!["a", "b"], vec![1.0, 0.0]).unwrap();
        let c = ConstraintSet::new(prior.space().clone())
            .with_zero_labels(&["a"])
            .unwrap();
        assert!(matches!(solve_mre(&prior, &c, &opts), Err(Error::Infeasible(_))));
        let bad = SolverOptions { tol: 0.0, ..opts };
        assert!(matches!(
            solve_mre(&uniform_dice(), &mean(4.0), &bad),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn jointly_inconsistent_moments() {
        let c = mean(3.0).with_moment(faces(), 4.0).unwrap();
        let err = solve_mre(&uniform_dice(), &c, &SolverOptions::default()).unwrap_err();
        assert!(
            matches!(err, Error::Infeasible(_) | Error::NotConverged(_)),
            "{err}"
        );
    }

    #[test]
    fn redundant_moment_is_harmless() {
        let c = mean(4.5).with_moment(faces(), 4.5).unwrap();
        let sol = solve_mre(&uniform_dice(), &c, &SolverOptions::default()).unwrap();
        assert!((sol.posterior.weights()[5] - 0.3474940657740611).abs() < 1e-9);
    }

    #[test]
    fn boundary_target_returns_point_mass() {
        let sol = solve_mre(&uniform_dice(), &mean(6.0), &SolverOptions::default()).unwrap();
        assert_eq!(sol.posterior.weights(), &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(sol.boundary);
        assert_eq!(sol.moment_multipliers()[0], f64::NEG_INFINITY);
        assert!((sol.achieved_kl.value() - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn boundary_face_with_second_moment() {
        // a parity moment pinned at its max forces the even faces,
        // then the mean is fitted on {2, 4, 6}
        let parity: Vec<f64> = (1..=6).map(|v| f64::from((v + 1) % 2)).collect();
        let c = ConstraintSet::new(dice())
            .with_moment(parity, 1.0)
            .unwrap()
            .with_moment(faces(), 4.0)
            .unwrap();
        let sol = solve_mre(&uniform_dice(), &c, &SolverOptions::default()).unwrap();
        let w = sol.posterior.weights();
        assert_eq!((w[0], w[2], w[4]), (0.0, 0.0, 0.0));
        assert!((w[1] + w[3] + w[5] - 1.0).abs() < 1e-12);
        // mean 4 on {2,4,6} is the uniform face
        assert!((w[3] - 1.0 / 3.0).abs() < 1e-10);
        assert!(sol.boundary);
    }

    #[test]
    fn not_converged_carries_best_iterate() {
        let opts = SolverOptions {
            tol: 1e-10,
            max_iter: 1,
        };
        match solve_mre(&uniform_dice(), &mean(5.9), &opts) {
            Err(Error::NotConverged(best)) => {
                assert_eq!(best.iterations, 1);
                assert!(best.kkt_residual > 1e-10);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn prior_zeros_propagate() {
        let prior = Distribution::new(dice(), vec![0.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let sol = solve_mre(&prior, &mean(4.5), &SolverOptions::default()).unwrap();
        assert_eq!(sol.posterior.weights()[0], 0.0);
        assert!(sol.achieved_kl.is_finite());
    }
}
