//! Information gain, relative entropy and Shannon entropy, in nats.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dist::Distribution;
use crate::error::{Error, Result};

/// A real number or `+∞`.
///
/// Serializes as a JSON number, or as the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    PosInfinity,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn value(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::PosInfinity => None,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            ExtendedReal::PosInfinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInfinity => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::PosInfinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(ExtendedReal::PosInfinity),
            Repr::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", found \"{s}\""
            ))),
        }
    }
}

fn check_plausibility(x: f64) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(Error::NonpositivePlausibility(x))
    }
}

/// `log(q / p)`: the information gained when a plausibility moves from `p` to `q`.
pub fn information_gain(p: f64, q: f64) -> Result<f64> {
    check_plausibility(p)?;
    check_plausibility(q)?;
    Ok((q / p).ln())
}

/// `H(q; p) = Σ q_i log(q_i / p_i)` with `0·log(0/p) = 0`.
///
/// Any outcome with `q_i > 0` and `p_i = 0` makes the result `+∞`.
pub fn relative_entropy(q: &Distribution, p: &Distribution) -> Result<ExtendedReal> {
    q.space().ensure_same(p.space())?;
    let mut total = 0.0;
    for (&qi, &pi) in q.weights().iter().zip(p.weights()) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(ExtendedReal::PosInfinity);
        }
        total += qi * (qi / pi).ln();
    }
    // Gibbs: rounding can leave a tiny negative sum when q ≈ p.
    Ok(ExtendedReal::Finite(total.max(0.0)))
}

/// `H(p) = −Σ p_i log p_i` with `0·log 0 = 0`.
pub fn shannon_entropy(p: &Distribution) -> f64 {
    let h: f64 = p
        .weights()
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum();
    h.clamp(0.0, (p.len() as f64).ln())
}
