//! Exact accuracy arithmetic.
//!
//! Accuracies are kept as exact fractions until they are rendered; rendering
//! rounds half-up to three decimals of percent (`89.189`).

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = Ratio<u64>;

/// `correct / total` for one evaluation, unreduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Accuracy {
    pub correct: u64,
    pub total: u64,
}

impl Accuracy {
    pub fn new(correct: u64, total: u64) -> Self {
        assert!(total > 0, "accuracy over an empty set");
        assert!(correct <= total, "more correct than total");
        Accuracy { correct, total }
    }

    pub fn ratio(&self) -> Rational {
        Rational::new(self.correct, self.total)
    }

    pub fn as_f64(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    pub fn percent_string(&self) -> String {
        percent_3dp(&self.ratio())
    }
}

impl fmt::Display for Accuracy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({}%)", self.correct, self.total, self.percent_string())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Renders `r` as a percentage with `decimals` fractional digits, rounding
/// half-up on the exact value.
pub fn percent_fixed(r: &Rational, decimals: u32) -> String {
    let scale = 10u128.pow(decimals);
    let num = *r.numer() as u128 * 100 * scale;
    let den = *r.denom() as u128;
    let units = (2 * num + den) / (2 * den);
    if decimals == 0 {
        return units.to_string();
    }
    format!(
        "{}.{:0width$}",
        units / scale,
        units % scale,
        width = decimals as usize
    )
}

/// Three-decimal percent, the format used in accuracy tables.
pub fn percent_3dp(r: &Rational) -> String {
    percent_fixed(r, 3)
}

/// Arithmetic mean of exact ratios.
pub fn mean(values: &[Rational]) -> Rational {
    assert!(!values.is_empty(), "mean of nothing");
    let sum = values
        .iter()
        .fold(Rational::from_integer(0), |acc, v| acc + v);
    sum / Rational::from_integer(values.len() as u64)
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    numerator: u64,
    denominator: u64,
    percent: String,
}

/// Serde adapter: `{"numerator", "denominator", "percent"}`. The percent is
/// presentation only; parsing recovers the exact fraction.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            numerator: *r.numer(),
            denominator: *r.denom(),
            percent: percent_3dp(r),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        if repr.denominator == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(repr.numerator, repr.denominator))
    }
}

/// A [`Rational`] that serializes as `{"numerator", "denominator", "percent"}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exact(#[serde(with = "serde_rational")] pub Rational);

impl From<Rational> for Exact {
    fn from(r: Rational) -> Self {
        Exact(r)
    }
}

impl Serialize for Accuracy {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            numerator: self.correct,
            denominator: self.total,
            percent: self.percent_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Accuracy {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        if repr.denominator == 0 || repr.numerator > repr.denominator {
            return Err(serde::de::Error::custom("accuracy out of range"));
        }
        Ok(Accuracy {
            correct: repr.numerator,
            total: repr.denominator,
        })
    }
}
