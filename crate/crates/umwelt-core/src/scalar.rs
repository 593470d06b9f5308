//! Model-wide arithmetic contract.
//!
//! Every analysis in this crate is driven by equality tests on probabilities,
//! so a model commits to one arithmetic up front: exact rationals (the
//! authoritative mode) or `f64` with an explicit comparison tolerance for
//! ingesting measured data. All algorithms are generic over [`Scalar`] and a
//! tolerance value of the same type; in rational mode the tolerance is zero
//! and every comparison is exact.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact-rational probability value, the default arithmetic.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse {text:?} as a probability value: {reason}")]
pub struct ParseScalarError {
    pub text: String,
    pub reason: String,
}

impl ParseScalarError {
    fn new(text: &str, reason: impl Into<String>) -> Self {
        ParseScalarError {
            text: text.to_owned(),
            reason: reason.into(),
        }
    }
}

/// Numeric type a loop model is built over.
///
/// `EXACT` marks whether equality decisions made with this type are
/// authoritative; float-mode results are flagged accordingly downstream.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Sum
    + 'static
{
    const EXACT: bool;

    fn from_u64(n: u64) -> Self;

    /// `num / den`, mostly for fixtures and tests. Panics if `den == 0`.
    fn ratio(num: i64, den: i64) -> Self;

    /// Parses `"3"`, `"1/2"`, or a decimal like `"0.25"` / `"2.5e-3"`.
    fn parse(text: &str) -> Result<Self, ParseScalarError>;

    /// Renders the value so that `parse(render(v)) == v`.
    fn render(&self) -> String;

    fn to_f64(&self) -> f64;

    fn abs(&self) -> Self;

    /// Total order used for deterministic sorting of signatures.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// `|self - other| <= tol`; with `tol == 0` this is plain equality.
    fn approx_eq(&self, other: &Self, tol: &Self) -> bool {
        (self.clone() - other.clone()).abs() <= *tol
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        parse_rational(text)
    }

    fn render(&self) -> String {
        if self.denom().is_one() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        Ord::cmp(self, other)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn parse(text: &str) -> Result<Self, ParseScalarError> {
        let trimmed = text.trim();
        if let Some((num, den)) = trimmed.split_once('/') {
            let n = f64::from_str(num.trim())
                .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
            let d = f64::from_str(den.trim())
                .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
            if d == 0.0 {
                return Err(ParseScalarError::new(text, "zero denominator"));
            }
            Ok(n / d)
        } else {
            f64::from_str(trimmed).map_err(|e| ParseScalarError::new(text, e.to_string()))
        }
    }

    fn render(&self) -> String {
        format!("{self}")
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }
}

fn parse_rational(text: &str) -> Result<Rational, ParseScalarError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(ParseScalarError::new(text, "empty string"));
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|e| ParseScalarError::new(text, e.to_string()))?;
        if d.is_zero() {
            return Err(ParseScalarError::new(text, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if trimmed.contains(['.', 'e', 'E']) {
        return parse_decimal(trimmed).ok_or_else(|| ParseScalarError::new(text, "bad decimal"));
    }
    BigInt::from_str(trimmed)
        .map(BigRational::from_integer)
        .map_err(|e| ParseScalarError::new(text, e.to_string()))
}

/// Decimal with optional exponent, converted exactly: `-1.25e-2` = `-1/80`.
fn parse_decimal(text: &str) -> Option<Rational> {
    let (mantissa, exp) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, i64::from_str(e).ok()?),
        None => (text, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    if !joined.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let unsigned = BigInt::from_str(&joined).ok()?;
    let numer = unsigned * BigInt::from(sign);
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow((-scale) as u32))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_forms() {
        assert_eq!(Rational::parse("1/2").unwrap(), Rational::ratio(1, 2));
        assert_eq!(Rational::parse("3").unwrap(), Rational::ratio(3, 1));
        assert_eq!(Rational::parse("0.25").unwrap(), Rational::ratio(1, 4));
        assert_eq!(Rational::parse("-1.25e-2").unwrap(), Rational::ratio(-1, 80));
        assert_eq!(Rational::parse(" 2/4 ").unwrap(), Rational::ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Rational::parse("").is_err());
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("one half").is_err());
        assert!(f64::parse("1/0").is_err());
    }

    #[test]
    fn render_round_trips() {
        for v in [
            Rational::ratio(0, 1),
            Rational::ratio(1, 2),
            Rational::ratio(-7, 3),
            Rational::ratio(5, 1),
        ] {
            assert_eq!(Rational::parse(&v.render()).unwrap(), v);
        }
        for v in [0.5_f64, 0.1, 1.0, 1e-9] {
            assert_eq!(f64::parse(&v.render()).unwrap(), v);
        }
    }

    #[test]
    fn approx_eq_respects_tolerance() {
        let a = Rational::ratio(1, 2);
        let b = Rational::ratio(1, 2);
        assert!(a.approx_eq(&b, &Rational::zero()));
        assert!(0.5_f64.approx_eq(&0.5000001, &1e-3));
        assert!(!0.5_f64.approx_eq(&0.6, &1e-3));
    }
}
