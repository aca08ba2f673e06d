//! Scalar arithmetic behind every payoff computation.
//!
//! All numeric operations in this crate are generic over [`Scalar`], which has
//! exactly two implementations: `f64` (floating mode) and [`Q`] (exact rational
//! mode). Rational mode makes identities such as the potential equality testable
//! with `==`; floating mode is the fast path for Monte Carlo work.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Q = BigRational;

/// Arithmetic mode selector used by the CLI and file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    Floating,
    Rational,
}

impl Display for ArithmeticMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArithmeticMode::Floating => write!(f, "floating"),
            ArithmeticMode::Rational => write!(f, "rational"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {text:?} as a scalar: {reason}")]
pub struct ScalarParseError {
    pub text: String,
    pub reason: String,
}

/// The numeric field used throughout the payoff calculus.
///
/// Implementations must be totally ordered on the values this crate produces
/// (payoffs, potentials, slacks); `f64` qualifies because no operation here
/// introduces NaN.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact (no rounding anywhere).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact conversion: every finite `f64` is a binary rational.
    fn from_f64(v: f64) -> Self;
    fn from_int_ratio(num: i128, den: i128) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Additive slack used when comparing payoff gains against a threshold.
    /// Zero in exact mode, 1e-12 in floating mode.
    fn comparison_slack() -> Self;
    /// Strict-feasibility margin below which a slack does not count as
    /// positive. Zero in exact mode, 1e-9 in floating mode.
    fn strictness_threshold() -> Self;
    /// Parse decimal text (`-1.25`, `3e-2`) or a fraction (`5/4`).
    fn parse_text(text: &str) -> Result<Self, ScalarParseError>;
    /// Canonical text form: 17 significant digits for `f64`, `n` or `n/d`
    /// for rationals.
    fn canonical_text(&self) -> String;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
    fn from_usize(v: usize) -> Self {
        Self::from_u64(v as u64)
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
    fn sum<I: IntoIterator<Item = Self>>(iter: I) -> Self {
        iter.into_iter().fold(Self::zero(), |acc, v| acc + v)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_u64(v: u64) -> Self {
        v as f64
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_int_ratio(num: i128, den: i128) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn comparison_slack() -> Self {
        1e-12
    }
    fn strictness_threshold() -> Self {
        1e-9
    }
    fn parse_text(text: &str) -> Result<Self, ScalarParseError> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let n = Self::parse_text(num)?;
            let d = Self::parse_text(den)?;
            if d == 0.0 {
                return Err(ScalarParseError {
                    text: text.to_string(),
                    reason: "zero denominator".to_string(),
                });
            }
            return Ok(n / d);
        }
        text.parse::<f64>().map_err(|e| ScalarParseError {
            text: text.to_string(),
            reason: e.to_string(),
        })
    }
    fn canonical_text(&self) -> String {
        format!("{:.16e}", self)
    }
}

impl Scalar for Q {
    const EXACT: bool = true;

    fn zero() -> Self {
        <Q as Zero>::zero()
    }
    fn one() -> Self {
        <Q as One>::one()
    }
    fn from_u64(v: u64) -> Self {
        Q::from_integer(BigInt::from(v))
    }
    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }
    fn from_f64(v: f64) -> Self {
        Q::from_float(v).expect("finite float required for exact conversion")
    }
    fn from_int_ratio(num: i128, den: i128) -> Self {
        Q::new(BigInt::from(num), BigInt::from(den))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn comparison_slack() -> Self {
        <Q as Zero>::zero()
    }
    fn strictness_threshold() -> Self {
        <Q as Zero>::zero()
    }
    fn parse_text(text: &str) -> Result<Self, ScalarParseError> {
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let n = Self::parse_text(num)?;
            let d = Self::parse_text(den)?;
            if Zero::is_zero(&d) {
                return Err(ScalarParseError {
                    text: text.to_string(),
                    reason: "zero denominator".to_string(),
                });
            }
            return Ok(n / d);
        }
        parse_decimal(text).ok_or_else(|| ScalarParseError {
            text: text.to_string(),
            reason: "expected decimal or fraction text".to_string(),
        })
    }
    fn canonical_text(&self) -> String {
        if One::is_one(self.denom()) {
            format!("{}", self.numer())
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
}

/// Parse decimal text (optionally with exponent) into an exact rational.
/// `"1.25e-2"` becomes `125 / 10000`.
fn parse_decimal(text: &str) -> Option<Q> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = text[pos + 1..].parse().ok()?;
            (&text[..pos], exp)
        }
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
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let joined = format!("{}{}", int_part, frac_part);
    let numer: BigInt = if joined.is_empty() {
        BigInt::from(0)
    } else {
        joined.parse().ok()?
    };
    let scale = frac_part.len() as i64 - exponent;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Q::new(numer, num::pow::pow(ten, scale as usize))
    } else {
        Q::from_integer(numer * num::pow::pow(ten, (-scale) as usize))
    };
    Some(if sign < 0 { -value } else { value })
}

/// Harmonic number 1 + 1/2 + ... + 1/k as a scalar; `harmonic(0) == 0`.
pub fn harmonic<S: Scalar>(k: usize) -> S {
    let mut acc = S::zero();
    for i in 1..=k {
        acc = acc + S::from_int_ratio(1, i as i128);
    }
    acc
}
