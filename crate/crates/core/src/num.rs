//! Number modes.
//!
//! Every cost computation in the engine is generic over [`Scalar`]. Two
//! implementations ship: [`Q`] (arbitrary-precision rationals, the default)
//! and `f64`. Car sets and rotation pointers always use [`Q`] so that
//! measures stay exact in both modes.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number.
pub type Q = BigRational;

/// Arithmetic used for flows and costs.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + Sum
{
    /// `true` when comparisons are exact.
    const EXACT: bool;

    /// Short name used in reports (`rational` or `float`).
    const MODE: NumberMode;

    fn from_q(q: &Q) -> Self;

    /// Exact rational value (for `f64` the exact binary fraction).
    fn to_q(&self) -> Q;

    fn to_f64(&self) -> f64;

    /// Residual tolerance for fixed-point and equality checks.
    fn tolerance() -> Self;

    fn pow(&self, exp: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..exp {
            out = out * self.clone();
        }
        out
    }

    fn from_int(n: i64) -> Self {
        Self::from_q(&Q::from_integer(BigInt::from(n)))
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn abs_diff(&self, other: &Self) -> Self {
        if self >= other {
            self.clone() - other.clone()
        } else {
            other.clone() - self.clone()
        }
    }

    /// `|self - other| <= tolerance()`; plain equality in exact mode.
    fn near(&self, other: &Self) -> bool {
        if Self::EXACT {
            self == other
        } else {
            self.abs_diff(other) <= Self::tolerance()
        }
    }

    /// `sum_{k=1..n} discount^k * values[k-1]`.
    fn discounted_sum(values: &[Self], discount: &Self) -> Self {
        let mut acc = Self::zero();
        for v in values.iter().rev() {
            acc = discount.clone() * (v.clone() + acc);
        }
        acc
    }

    /// JSON rendering: `"p/q"` strings for rationals, numbers for floats.
    fn to_json(&self) -> serde_json::Value;
}

/// Arithmetic mode selected for a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumberMode {
    #[default]
    Rational,
    Float,
}


impl std::fmt::Display for NumberMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NumberMode::Rational => f.write_str("rational"),
            NumberMode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for NumberMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(NumberMode::Rational),
            "float" => Ok(NumberMode::Float),
            other => Err(Error::Parse(format!("unknown number mode `{other}`"))),
        }
    }
}

impl Scalar for Q {
    const EXACT: bool = true;
    const MODE: NumberMode = NumberMode::Rational;

    fn from_q(q: &Q) -> Self {
        q.clone()
    }

    fn to_q(&self) -> Q {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tolerance() -> Self {
        Q::zero()
    }

    fn pow(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }

    /// Horner over integers: only the numerator grows, the denominator is
    /// the lcm of the value denominators times `den^n`.
    fn discounted_sum(values: &[Self], discount: &Self) -> Self {
        if values.is_empty() {
            return Q::zero();
        }
        let lcm = values
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let p = discount.numer();
        let q = discount.denom();
        let mut acc = BigInt::zero();
        let mut p_pow = BigInt::one();
        for v in values {
            p_pow *= p;
            let scaled = v.numer() * (&lcm / v.denom());
            acc = acc * q + scaled * &p_pow;
        }
        let q_pow = num_traits::pow(q.clone(), values.len());
        Q::new(acc, lcm * q_pow)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format_q(self))
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: NumberMode = NumberMode::Float;

    fn from_q(q: &Q) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }

    fn to_q(&self) -> Q {
        Q::from_float(*self).unwrap_or_else(Q::zero)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn tolerance() -> Self {
        1e-9
    }

    fn pow(&self, exp: u32) -> Self {
        self.powi(exp as i32)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Number::from_f64(*self)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

/// Builds `n/d`. Panics on a zero denominator.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"0.125"` exactly.
pub fn parse_q(text: &str) -> Result<Q> {
    let s = text.trim();
    let bad = || Error::Parse(format!("`{text}` is not a rational (expected \"p/q\")"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("`{text}` has a zero denominator")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_part = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            BigInt::from_str(int).map_err(|_| bad())?.abs()
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_part = BigInt::from_str(frac).map_err(|_| bad())?;
        let value = Q::new(int_part * &scale + frac_part, scale);
        return Ok(if negative { -value } else { value });
    }
    BigInt::from_str(s)
        .map(Q::from_integer)
        .map_err(|_| bad())
}

/// Canonical text form: `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_q(value: &Q) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Smallest integer strictly greater than `value`.
pub fn floor_plus_one(value: &Q) -> BigInt {
    value.floor().to_integer() + BigInt::one()
}

/// Serde adapter storing a [`Q`] as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ratio(pub Q);

impl serde::Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_q(&self.0))
    }
}

impl<'de> serde::Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = Ratio;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a rational written as a \"p/q\" string or an integer")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<Ratio, E> {
                parse_q(v).map(Ratio).map_err(E::custom)
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<Ratio, E> {
                Ok(Ratio(qi(v)))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<Ratio, E> {
                Ok(Ratio(Q::from_integer(BigInt::from(v))))
            }
        }
        d.deserialize_any(Visitor)
    }
}

impl From<Q> for Ratio {
    fn from(value: Q) -> Self {
        Ratio(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q(" 6/8 ").unwrap(), q(3, 4));
        assert_eq!(parse_q("2").unwrap(), qi(2));
        assert_eq!(parse_q("0.1").unwrap(), q(1, 10));
        assert_eq!(parse_q("0.525").unwrap(), q(21, 40));
        assert_eq!(parse_q("-1.5").unwrap(), q(-3, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
        assert!(parse_q("1.").is_err());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(format_q(&q(6, 8)), "3/4");
        assert_eq!(format_q(&qi(3)), "3");
        assert_eq!(format_q(&q(-1, 2)), "-1/2");
    }

    #[test]
    fn floor_plus_one_is_strict() {
        assert_eq!(floor_plus_one(&qi(10)), BigInt::from(11));
        assert_eq!(floor_plus_one(&q(21, 2)), BigInt::from(11));
    }

    #[test]
    fn rational_discounted_sum_matches_naive() {
        let values = vec![q(1, 3), q(3, 4), q(5, 7), qi(1), q(2, 9)];
        let d = q(99, 100);
        let mut naive = Q::zero();
        let mut w = Q::one();
        for v in &values {
            w = &w * &d;
            naive += &w * v;
        }
        assert_eq!(<Q as Scalar>::discounted_sum(&values, &d), naive);
        assert_eq!(<Q as Scalar>::discounted_sum(&[], &d), Q::zero());
    }

    #[test]
    fn float_discounted_sum() {
        let s = <f64 as Scalar>::discounted_sum(&[1.0, 1.0], &0.5);
        assert!((s - 0.75).abs() < 1e-15);
    }
}
