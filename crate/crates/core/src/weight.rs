//! Exact non-negative rational costs.
//!
//! All cost logic in this crate is exact: stopping rules of the form
//! `w(I) >= w_0` must not depend on floating-point rounding, so weights are
//! reduced fractions over machine integers and every comparison and sum is
//! performed in rational arithmetic.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exact signed rational, used for ratios and fractions derived from weights.
pub type Rational = Ratio<i64>;

/// A non-negative rational cost, stored in reduced form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Rational);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("weight denominator must be nonzero")]
    ZeroDenominator,
    #[error("weight must be non-negative, got {0}")]
    Negative(String),
    #[error("malformed weight `{0}`, expected `p` or `p/q`")]
    Malformed(String),
}

impl Weight {
    pub fn new(numer: i64, denom: i64) -> Result<Self, WeightError> {
        if denom == 0 {
            return Err(WeightError::ZeroDenominator);
        }
        let ratio = Rational::new(numer, denom);
        if ratio < Rational::from_integer(0) {
            return Err(WeightError::Negative(format!("{numer}/{denom}")));
        }
        Ok(Weight(ratio))
    }

    pub fn from_integer(value: u32) -> Self {
        Weight(Rational::from_integer(i64::from(value)))
    }

    pub fn zero() -> Self {
        Weight(Rational::from_integer(0))
    }

    pub fn one() -> Self {
        Weight(Rational::from_integer(1))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Rational::from_integer(0)
    }

    /// The underlying reduced rational.
    pub fn ratio(&self) -> Rational {
        self.0
    }

    pub fn from_ratio(ratio: Rational) -> Result<Self, WeightError> {
        if ratio < Rational::from_integer(0) {
            return Err(WeightError::Negative(ratio.to_string()));
        }
        Ok(Weight(ratio))
    }

    /// Weight multiplied by a non-negative count.
    pub fn times(&self, count: usize) -> Weight {
        Weight(self.0 * Rational::from_integer(count as i64))
    }

    /// Exact quotient `self / other`; `None` when `other` is zero.
    pub fn div(&self, other: &Weight) -> Option<Rational> {
        if other.is_zero() {
            None
        } else {
            Some(self.0 / other.0)
        }
    }

    /// Decimal rendering, informational only (cost logic never uses this).
    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_rational(&self.0))
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

/// Renders a rational as `p` when integral and `p/q` otherwise.
pub fn display_rational(ratio: &Rational) -> String {
    if ratio.is_integer() {
        ratio.numer().to_string()
    } else {
        format!("{}/{}", ratio.numer(), ratio.denom())
    }
}

impl FromStr for Weight {
    type Err = WeightError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        let malformed = || WeightError::Malformed(text.to_string());
        match text.split_once('/') {
            Some((num, den)) => {
                let numer: i64 = num.trim().parse().map_err(|_| malformed())?;
                let denom: i64 = den.trim().parse().map_err(|_| malformed())?;
                Weight::new(numer, denom)
            }
            None => {
                let numer: i64 = text.parse().map_err(|_| malformed())?;
                Weight::new(numer, 1)
            }
        }
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        Weight(self.0 + rhs.0)
    }
}

impl AddAssign for Weight {
    fn add_assign(&mut self, rhs: Weight) {
        self.0 += rhs.0;
    }
}

impl Sum for Weight {
    fn sum<I: Iterator<Item = Weight>>(iter: I) -> Weight {
        iter.fold(Weight::zero(), |acc, w| acc + w)
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!("1".parse::<Weight>().unwrap(), Weight::one());
        assert_eq!("3/2".parse::<Weight>().unwrap(), Weight::new(3, 2).unwrap());
        assert_eq!(
            " 4/8 ".parse::<Weight>().unwrap(),
            Weight::new(1, 2).unwrap()
        );
        assert!("1/0".parse::<Weight>().is_err());
        assert!("-1/3".parse::<Weight>().is_err());
        assert!("x".parse::<Weight>().is_err());
    }

    #[test]
    fn display_is_reduced() {
        assert_eq!(Weight::new(4, 8).unwrap().to_string(), "1/2");
        assert_eq!(Weight::new(6, 3).unwrap().to_string(), "2");
        assert_eq!(Weight::zero().to_string(), "0");
    }

    #[test]
    fn sums_are_exact() {
        let thirds: Weight = (0..3).map(|_| Weight::new(1, 3).unwrap()).sum();
        assert_eq!(thirds, Weight::one());
        let w = Weight::new(1, 10).unwrap().times(10);
        assert_eq!(w, Weight::one());
    }

    #[test]
    fn division_is_exact() {
        let a = Weight::new(136, 1).unwrap();
        let b = Weight::new(25, 1).unwrap();
        assert_eq!(a.div(&b).unwrap(), Rational::new(136, 25));
        assert!(a.div(&Weight::zero()).is_none());
    }

    #[test]
    fn serde_round_trip() {
        let w = Weight::new(7, 3).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        assert_eq!(json, "\"7/3\"");
        let back: Weight = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
    }
}
