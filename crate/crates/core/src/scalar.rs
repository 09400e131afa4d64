//! Arithmetic modes.
//!
//! Every numeric routine in the crate is generic over [`Scalar`], which is
//! implemented for `f64` (floating mode, tolerance-based comparisons) and
//! [`Rational`] (exact mode, tolerances are ignored and comparisons are exact).

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational number.
pub type Rational = BigRational;

/// Default comparison tolerance in floating mode.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Float,
    Rational,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Float => f.write_str("float"),
            Mode::Rational => f.write_str("rational"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Mode::Float),
            "rational" => Ok(Mode::Rational),
            other => Err(Error::parse(format!("unknown mode `{other}`"))),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Signed
    + Sum
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn to_f64(&self) -> f64;

    /// Converts a float into this mode. Rational mode reads the shortest
    /// decimal representation exactly, so `0.1` becomes `1/10`.
    fn from_f64(v: f64) -> Result<Self>;

    /// `|self - other| <= tol` in floating mode, exact equality otherwise.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// `self >= -tol` in floating mode, `self >= 0` otherwise.
    fn nonneg_within(&self, tol: f64) -> bool;

    /// `self > tol` in floating mode, `self > 0` otherwise.
    fn positive_beyond(&self, tol: f64) -> bool;

    fn is_finite_value(&self) -> bool;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self>;

    /// Absolute difference, reported as a float for diagnostics.
    fn gap(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).abs().to_f64()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::parse(format!("non-finite value {v}")))
        }
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn nonneg_within(&self, tol: f64) -> bool {
        *self >= -tol
    }

    fn positive_beyond(&self, tol: f64) -> bool {
        *self > tol
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::parse(format!("number {n} is not representable")))
                .and_then(<f64 as Scalar>::from_f64),
            Value::String(s) => parse_rational(s).map(|r| Scalar::to_f64(&r)),
            other => Err(Error::parse(format!("expected a number, found {other}"))),
        }
    }
}

impl Scalar for Rational {
    const MODE: Mode = Mode::Rational;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::parse(format!("non-finite value {v}")));
        }
        parse_rational(&format!("{v}"))
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn nonneg_within(&self, _tol: f64) -> bool {
        !self.is_negative()
    }

    fn positive_beyond(&self, _tol: f64) -> bool {
        self.is_positive()
    }

    fn is_finite_value(&self) -> bool {
        true
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(<Rational as Scalar>::from_i64(i))
                } else {
                    parse_rational(&n.to_string())
                }
            }
            other => Err(Error::parse(format!("expected a \"p/q\" string, found {other}"))),
        }
    }
}

/// `p/q` for non-integers, `p` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, an integer, or a plain or scientific decimal exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::parse(format!("cannot parse `{s}` as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Converts between arithmetic modes.
pub fn convert<A: Scalar, B: Scalar>(v: &A) -> Result<B> {
    match (A::MODE, B::MODE) {
        (Mode::Rational, Mode::Rational) | (Mode::Float, Mode::Float) | (Mode::Float, Mode::Rational) => {
            B::from_json(&v.to_json())
        }
        (Mode::Rational, Mode::Float) => B::from_f64(v.to_f64()),
    }
}

/// Convenience for tests and generators: `Rational` from an `i64` pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/16").unwrap(), rat(3, 16));
        assert_eq!(parse_rational("-1/16").unwrap(), rat(-1, 16));
        assert_eq!(parse_rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(parse_rational("2.5e-1").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn float_reads_as_shortest_decimal() {
        let r = <Rational as Scalar>::from_f64(0.1).unwrap();
        assert_eq!(r, rat(1, 10));
        let back: f64 = convert(&r).unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_round_trip() {
        let r = rat(-5, 12);
        assert_eq!(Rational::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(format_rational(&rat(4, 2)), "2");
        let x = 0.375f64;
        assert_eq!(f64::from_json(&x.to_json()).unwrap(), x);
        assert_eq!(f64::from_json(&Value::String("3/8".into())).unwrap(), 0.375);
    }

    #[test]
    fn tolerance_semantics() {
        assert!(1.0f64.approx_eq(&(1.0 + 1e-12), 1e-9));
        assert!(!rat(1, 3).approx_eq(&rat(333_333, 1_000_000), 1e-3));
        assert!((-1e-12f64).nonneg_within(1e-9));
        assert!(!rat(-1, 1_000_000_000).nonneg_within(1.0));
    }
}
