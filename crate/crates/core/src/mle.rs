//! Maximum likelihood as minimization of `H(empirical; model_θ)`.
//!
//! On a finite outcome space the empirical entropy is computable, so
//! `empirical_kl(θ) = −H(empirical) − log_likelihood(θ) / N` holds exactly and
//! both objectives share their optimizers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::{Distribution, OutcomeSpace};
use crate::error::{Error, Result};
use crate::measures::{relative_entropy, ExtendedReal};

/// Observed outcome counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    space: OutcomeSpace,
    counts: Vec<u64>,
}

impl Dataset {
    pub fn new(space: OutcomeSpace, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: counts.len(),
            });
        }
        if counts.iter().sum::<u64>() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self { space, counts })
    }

    /// Labels missing from `pairs` get count zero.
    pub fn from_pairs<S: AsRef<str>>(space: OutcomeSpace, pairs: &[(S, u64)]) -> Result<Self> {
        let mut counts = vec![0; space.len()];
        for (label, c) in pairs {
            counts[space.index_of(label.as_ref())?] += c;
        }
        Self::new(space, counts)
    }

    /// Tallies a sequence of observed labels.
    pub fn from_observations<S: AsRef<str>>(space: OutcomeSpace, observations: &[S]) -> Result<Self> {
        let mut counts = vec![0; space.len()];
        for label in observations {
            counts[space.index_of(label.as_ref())?] += 1;
        }
        Self::new(space, counts)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn empirical(&self) -> Distribution {
        let weights = self.counts.iter().map(|&c| c as f64).collect();
        Distribution::new(self.space.clone(), weights).expect("dataset is nonempty")
    }
}

pub type DensityFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum Family {
    /// `θ = P(first label)` over a two-label space.
    Bernoulli,
    /// `θ` = the first `n − 1` weights; the last is `1 − Σθ`.
    Categorical,
    /// `f(k; θ) ∝ θ^(k−1)` on `{1..m}`, `θ ∈ (0, 1)`.
    TruncatedGeometric,
    /// Raw (unnormalized) weights as a function of `θ`.
    Custom(DensityFn),
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Bernoulli => f.write_str("Bernoulli"),
            Family::Categorical => f.write_str("Categorical"),
            Family::TruncatedGeometric => f.write_str("TruncatedGeometric"),
            Family::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Parameter interval; `open` excludes both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub lo: f64,
    pub hi: f64,
    pub open: bool,
}

impl Bound {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open: false }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, open: true }
    }

    fn contains(&self, x: f64) -> bool {
        if self.open {
            x > self.lo && x < self.hi
        } else {
            x >= self.lo && x <= self.hi
        }
    }
}

#[derive(Clone, Debug)]
pub struct ParametricModel {
    name: String,
    space: OutcomeSpace,
    family: Family,
    bounds: Vec<Bound>,
}

impl ParametricModel {
    pub fn bernoulli(space: OutcomeSpace) -> Result<Self> {
        if space.len() != 2 {
            return Err(Error::InvalidArgument(format!(
                "bernoulli needs exactly two labels, got {}",
                space.len()
            )));
        }
        Ok(Self {
            name: "bernoulli".into(),
            space,
            family: Family::Bernoulli,
            bounds: vec![Bound::closed(0.0, 1.0)],
        })
    }

    pub fn categorical(space: OutcomeSpace) -> Self {
        let dim = space.len() - 1;
        Self {
            name: "categorical".into(),
            space,
            family: Family::Categorical,
            bounds: vec![Bound::closed(0.0, 1.0); dim],
        }
    }

    pub fn truncated_geometric(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(
                "truncated geometric needs at least two outcomes".into(),
            ));
        }
        Ok(Self {
            name: "truncated_geometric".into(),
            space: OutcomeSpace::integers(1, m as i64)?,
            family: Family::TruncatedGeometric,
            bounds: vec![Bound::open(0.0, 1.0)],
        })
    }

    pub fn custom(
        name: impl Into<String>,
        space: OutcomeSpace,
        bounds: Vec<Bound>,
        density: DensityFn,
    ) -> Self {
        Self {
            name: name.into(),
            space,
            family: Family::Custom(density),
            bounds,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn bounds(&self) -> &[Bound] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn in_domain(&self, theta: &[f64]) -> bool {
        if theta.len() != self.dim() || !theta.iter().all(|t| t.is_finite()) {
            return false;
        }
        if !self.bounds.iter().zip(theta).all(|(b, &t)| b.contains(t)) {
            return false;
        }
        match self.family {
            Family::Categorical => theta.iter().sum::<f64>() <= 1.0 + 1e-12,
            _ => true,
        }
    }

    /// Weights at `θ` without the domain check; limits at open bounds are
    /// taken where they exist.
    fn raw_weights(&self, theta: &[f64]) -> Vec<f64> {
        match &self.family {
            Family::Bernoulli => vec![theta[0], 1.0 - theta[0]],
            Family::Categorical => {
                let mut w = theta.to_vec();
                w.push((1.0 - theta.iter().sum::<f64>()).max(0.0));
                w
            }
            Family::TruncatedGeometric => {
                let r = theta[0];
                (0..self.space.len() as i32).map(|k| r.powi(k)).collect()
            }
            Family::Custom(f) => f(theta),
        }
    }

    fn density_unchecked(&self, theta: &[f64]) -> Result<Distribution> {
        Distribution::new(self.space.clone(), self.raw_weights(theta))
    }

    pub fn density(&self, theta: &[f64]) -> Result<Distribution> {
        if !self.in_domain(theta) {
            return Err(Error::ThetaOutOfDomain(theta.to_vec()));
        }
        self.density_unchecked(theta)
    }
}

/// Builds models by name from the labels present in a dataset.
pub type ModelBuilder = Box<dyn Fn(&[String]) -> Result<ParametricModel> + Send + Sync>;

pub struct ModelRegistry {
    builders: BTreeMap<String, ModelBuilder>,
}

impl Default for ModelRegistry {
    fn default() -> Self {
        let mut r = Self {
            builders: BTreeMap::new(),
        };
        r.register("bernoulli", |labels| {
            ParametricModel::bernoulli(OutcomeSpace::new(labels.iter().cloned())?)
        });
        r.register("categorical", |labels| {
            Ok(ParametricModel::categorical(OutcomeSpace::new(
                labels.iter().cloned(),
            )?))
        });
        r.register("truncated_geometric", |labels| {
            let mut m = 0;
            for l in labels {
                let v: usize = l.parse().map_err(|_| Error::NonIntegerLabel(l.clone()))?;
                if v == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "truncated geometric labels start at 1, got {l}"
                    )));
                }
                m = m.max(v);
            }
            ParametricModel::truncated_geometric(m)
        });
        r
    }
}

impl ModelRegistry {
    pub fn register<F>(&mut self, name: &str, builder: F)
    where
        F: Fn(&[String]) -> Result<ParametricModel> + Send + Sync + 'static,
    {
        self.builders.insert(name.to_string(), Box::new(builder));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, labels: &[String]) -> Result<ParametricModel> {
        let builder = self
            .builders
            .get(name)
            .ok_or_else(|| Error::UnsupportedModel(name.to_string()))?;
        builder(labels)
    }
}

fn ll_of(density: &Distribution, data: &Dataset) -> f64 {
    data.counts
        .iter()
        .zip(density.weights())
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &f)| {
            if f > 0.0 {
                c as f64 * f.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .sum()
}

/// `Σ_i counts_i · log f(label_i; θ)`; `−∞` when an observed label has
/// probability zero.
pub fn log_likelihood(model: &ParametricModel, theta: &[f64], data: &Dataset) -> Result<f64> {
    model.space.ensure_same(&data.space)?;
    Ok(ll_of(&model.density(theta)?, data))
}

/// `H(empirical; f_θ)`.
pub fn empirical_kl(model: &ParametricModel, theta: &[f64], data: &Dataset) -> Result<ExtendedReal> {
    model.space.ensure_same(&data.space)?;
    relative_entropy(&data.empirical(), &model.density(theta)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    ClosedForm,
    GoldenSection,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MleReport {
    pub model: String,
    pub theta: Vec<f64>,
    pub log_likelihood: f64,
    pub empirical_kl: ExtendedReal,
    pub method: FitMethod,
    pub degenerate: bool,
    pub note: &'static str,
}

const ROLE_NOTE: &str = "model density acts as the prior and the empirical distribution as \
                         the posterior; theta minimizes their relative entropy";

/// Maximizes the log-likelihood.
///
/// Bernoulli and categorical use empirical frequencies. One-parameter
/// families use a coarse grid, golden-section search on the best bracket,
/// then bisection on the sign of the numerical derivative. A maximizer on
/// the edge of the domain comes back as [`Error::DegenerateData`] carrying
/// the full report.
pub fn mle_fit(model: &ParametricModel, data: &Dataset, tol: f64) -> Result<MleReport> {
    model.space.ensure_same(&data.space)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (theta, method, degenerate) = match model.family {
        Family::Bernoulli | Family::Categorical => {
            let freq = data.empirical();
            let theta = freq.weights()[..model.dim()].to_vec();
            let point_mass = data.counts.iter().filter(|&&c| c > 0).count() == 1;
            (theta, FitMethod::ClosedForm, point_mass)
        }
        _ if model.dim() == 1 => {
            let (t, edge) = search_1d(model, data, tol)?;
            (vec![t], FitMethod::GoldenSection, edge)
        }
        _ => return Err(Error::UnsupportedModel(model.name.clone())),
    };
    let density = model.density_unchecked(&theta)?;
    let report = MleReport {
        model: model.name.clone(),
        log_likelihood: ll_of(&density, data),
        empirical_kl: relative_entropy(&data.empirical(), &density)?,
        theta,
        method,
        degenerate,
        note: ROLE_NOTE,
    };
    if degenerate {
        Err(Error::DegenerateData(Box::new(report)))
    } else {
        Ok(report)
    }
}

const GRID: usize = 1024;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Returns the maximizer and whether it sits on a domain edge.
fn search_1d(model: &ParametricModel, data: &Dataset, tol: f64) -> Result<(f64, bool)> {
    let Bound { lo, hi, .. } = model.bounds[0];
    let f = |t: f64| -> f64 {
        model
            .density_unchecked(&[t])
            .map(|d| ll_of(&d, data))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let step = (hi - lo) / GRID as f64;
    let grid = |k: usize| lo + step * (k as f64 + 0.5);
    let best = (0..GRID)
        .map(|k| (k, f(grid(k))))
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k)
        .expect("grid is nonempty");
    if f(grid(best)) == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(
            "log-likelihood is −∞ everywhere on the domain".into(),
        ));
    }
    let (mut a, mut b) = (
        if best == 0 { lo } else { grid(best - 1) },
        if best == GRID - 1 { hi } else { grid(best + 1) },
    );

    // golden section; interior probes only, so open bounds are never evaluated
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut theta = 0.5 * (a + b);

    // refine on the sign of the central-difference derivative
    let h = (1e-6 * (hi - lo))
        .min(0.25 * (theta - lo))
        .min(0.25 * (hi - theta));
    if h > 0.0 {
        let slope = |t: f64| f(t + h) - f(t - h);
        let (mut left, mut right) = ((theta - 4.0 * tol).max(lo + h), (theta + 4.0 * tol).min(hi - h));
        if left < right && slope(left) > 0.0 && slope(right) < 0.0 {
            for _ in 0..100 {
                let mid = 0.5 * (left + right);
                if mid <= left || mid >= right {
                    break;
                }
                if slope(mid) > 0.0 {
                    left = mid;
                } else {
                    right = mid;
                }
            }
            theta = 0.5 * (left + right);
        }
    }

    let edge_gap = 10.0 * tol;
    if theta - lo <= edge_gap {
        Ok((lo, true))
    } else if hi - theta <= edge_gap {
        Ok((hi, true))
    } else {
        Ok((theta, false))
    }
}
