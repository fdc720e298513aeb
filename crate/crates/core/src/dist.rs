//! Outcome spaces, distributions and events.
//!
//! Every vector in the crate is aligned to the label order of an
//! [`OutcomeSpace`]. Spaces are cheap to clone and compare by label list.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct OutcomeSpace {
    inner: Arc<SpaceInner>,
}

struct SpaceInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(SpaceInner { labels, index }),
        })
    }

    /// Space labelled by the decimal integers `lo..=hi`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        Self::new((lo..=hi).map(|v| v.to_string()))
    }

    pub fn len(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.inner
            .index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub(crate) fn ensure_same(&self, other: &OutcomeSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

impl PartialEq for OutcomeSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.labels == other.inner.labels
    }
}

impl Eq for OutcomeSpace {}

impl fmt::Debug for OutcomeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.labels()).finish()
    }
}

/// A probability vector over an [`OutcomeSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    space: OutcomeSpace,
    weights: Vec<f64>,
}

impl Distribution {
    /// Normalizes `raw_weights` by their sum.
    pub fn new(space: OutcomeSpace, raw_weights: Vec<f64>) -> Result<Self> {
        if raw_weights.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: raw_weights.len(),
            });
        }
        for (index, &value) in raw_weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let total: f64 = raw_weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotal);
        }
        let weights = if total == 1.0 {
            raw_weights
        } else {
            raw_weights.into_iter().map(|w| w / total).collect()
        };
        Ok(Self { space, weights })
    }

    /// Builds from labels and weights in one go.
    pub fn from_labels<S: Into<String>>(labels: Vec<S>, raw_weights: Vec<f64>) -> Result<Self> {
        Self::new(OutcomeSpace::new(labels)?, raw_weights)
    }

    pub fn point_mass(space: OutcomeSpace, index: usize) -> Result<Self> {
        let mut weights = vec![0.0; space.len()];
        *weights.get_mut(index).ok_or(Error::LengthMismatch {
            expected: space.len(),
            found: index + 1,
        })? = 1.0;
        Ok(Self { space, weights })
    }

    /// Callers guarantee nonnegative weights summing to one.
    pub(crate) fn from_normalized(space: OutcomeSpace, weights: Vec<f64>) -> Self {
        debug_assert_eq!(space.len(), weights.len());
        Self { space, weights }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, label: &str) -> Result<f64> {
        Ok(self.weights[self.space.index_of(label)?])
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    /// Probability of an event.
    pub fn mass(&self, event: &Event) -> Result<f64> {
        self.space.ensure_same(&event.space)?;
        Ok(self
            .weights
            .iter()
            .zip(&event.members)
            .filter(|(_, &inside)| inside)
            .map(|(w, _)| w)
            .sum())
    }

    /// Conditions on `event`.
    ///
    /// A distribution already supported inside the event is returned
    /// unchanged, which makes conditioning idempotent bit for bit.
    pub fn restrict(&self, event: &Event) -> Result<Distribution> {
        self.space.ensure_same(&event.space)?;
        let outside_empty = self
            .weights
            .iter()
            .zip(&event.members)
            .all(|(&w, &inside)| inside || w == 0.0);
        let mass = self.mass(event)?;
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvent { step: None });
        }
        if outside_empty {
            return Ok(self.clone());
        }
        let weights = self
            .weights
            .iter()
            .zip(&event.members)
            .map(|(&w, &inside)| if inside { w / mass } else { 0.0 })
            .collect();
        Ok(Self::from_normalized(self.space.clone(), weights))
    }

    /// Total variation distance, `½ Σ |d1_i − d2_i|`.
    pub fn tv_distance(&self, other: &Distribution) -> Result<f64> {
        self.space.ensure_same(&other.space)?;
        let l1: f64 = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok((0.5 * l1).min(1.0))
    }

    /// Sums weights over the cells of a partition of this space.
    pub fn marginalize(&self, cells: &[Vec<usize>], onto: OutcomeSpace) -> Result<Distribution> {
        if cells.len() != onto.len() {
            return Err(Error::LengthMismatch {
                expected: onto.len(),
                found: cells.len(),
            });
        }
        let weights = cells
            .iter()
            .map(|cell| cell.iter().map(|&i| self.weights[i]).sum())
            .collect();
        Distribution::new(onto, weights)
    }

    pub fn to_doc(&self) -> DistributionDoc {
        DistributionDoc {
            labels: self.space.labels().to_vec(),
            weights: self.weights.clone(),
        }
    }
}

/// Free-function form of [`Distribution::new`].
pub fn make_distribution(space: OutcomeSpace, raw_weights: Vec<f64>) -> Result<Distribution> {
    Distribution::new(space, raw_weights)
}

pub fn restrict(d: &Distribution, e: &Event) -> Result<Distribution> {
    d.restrict(e)
}

pub fn tv_distance(d1: &Distribution, d2: &Distribution) -> Result<f64> {
    d1.tv_distance(d2)
}

/// Serialized form: `{"labels": [...], "weights": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDoc {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl TryFrom<DistributionDoc> for Distribution {
    type Error = Error;

    fn try_from(doc: DistributionDoc) -> Result<Self> {
        Distribution::new(OutcomeSpace::new(doc.labels)?, doc.weights)
    }
}

impl From<&Distribution> for DistributionDoc {
    fn from(d: &Distribution) -> Self {
        d.to_doc()
    }
}

/// A subset of an outcome space. May be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    space: OutcomeSpace,
    members: Vec<bool>,
}

impl Event {
    pub fn new<S: AsRef<str>>(space: OutcomeSpace, labels: &[S]) -> Result<Self> {
        let mut members = vec![false; space.len()];
        for label in labels {
            members[space.index_of(label.as_ref())?] = true;
        }
        Ok(Self { space, members })
    }

    pub fn from_mask(space: OutcomeSpace, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: members.len(),
            });
        }
        Ok(Self { space, members })
    }

    pub fn from_indices(space: OutcomeSpace, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; space.len()];
        for &i in indices {
            let n = space.len();
            *members.get_mut(i).ok_or(Error::LengthMismatch {
                expected: n,
                found: i + 1,
            })? = true;
        }
        Ok(Self { space, members })
    }

    pub fn full(space: OutcomeSpace) -> Self {
        let members = vec![true; space.len()];
        Self { space, members }
    }

    pub fn empty(space: OutcomeSpace) -> Self {
        let members = vec![false; space.len()];
        Self { space, members }
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.get(index).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&m| m)
    }

    pub fn labels(&self) -> Vec<String> {
        self.space
            .labels()
            .iter()
            .zip(&self.members)
            .filter(|(_, &m)| m)
            .map(|(l, _)| l.clone())
            .collect()
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space.clone(),
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    pub fn intersect(&self, other: &Event) -> Result<Event> {
        self.space.ensure_same(&other.space)?;
        Ok(Event {
            space: self.space.clone(),
            members: self
                .members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a && *b)
                .collect(),
        })
    }

    pub fn is_subset_of(&self, other: &Event) -> bool {
        self.members.iter().zip(&other.members).all(|(a, b)| !a || *b)
    }
}
