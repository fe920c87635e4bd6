//! Coefficient fields.
//!
//! Every computation fixes one coefficient field. [`Rational`] is exact and is
//! the default everywhere; `f64` is available for quick numeric runs and goes
//! through [`FLOAT_ZERO_TOL`] whenever a value has to be compared with zero.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{Debug, Display};
use core::ops::{Add, Div, Mul, Neg, Sub};
use core::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Absolute threshold under which an `f64` coefficient counts as zero.
pub const FLOAT_ZERO_TOL: f64 = 1e-12;

/// A coefficient field.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    /// True for fields where arithmetic never rounds.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Zero test: exact for rationals, tolerance-based for floats.
    fn is_negligible(&self) -> bool;

    fn abs(&self) -> Self;

    /// Approximate magnitude, used for pivot choice and reports.
    fn magnitude(&self) -> f64;

    fn to_f64(&self) -> f64;

    /// Parses an integer, a decimal (`1.25`) or a ratio of integers (`3/4`).
    fn parse_literal(s: &str) -> Option<Self>;

    /// Exact conversion of a finite float (`None` for NaN or infinities).
    fn from_f64(v: f64) -> Option<Self>;
}

fn parse_decimal_parts(s: &str) -> Option<(bool, String, String)> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some((neg, String::from(int), String::from(frac)))
}

fn parse_rational_decimal(s: &str) -> Option<Rational> {
    let (neg, int, frac) = parse_decimal_parts(s)?;
    let mut digits = int;
    digits.push_str(&frac);
    if digits.is_empty() {
        return None;
    }
    let num = BigInt::from_str(&digits).ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(v: f64) -> Option<Self> {
        Rational::from_float(v)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_rational_decimal(n.trim())?;
            let d = parse_rational_decimal(d.trim())?;
            if d.is_zero() {
                return None;
            }
            return Some(n / d);
        }
        parse_rational_decimal(s)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn is_negligible(&self) -> bool {
        libm::fabs(*self) <= FLOAT_ZERO_TOL
    }

    fn abs(&self) -> Self {
        libm::fabs(*self)
    }

    fn magnitude(&self) -> f64 {
        libm::fabs(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn parse_literal(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            return Some(n / d);
        }
        s.parse().ok()
    }
}

/// Largest magnitude among `values`, as a scalar (zero for an empty input).
pub fn max_abs<'a, S: Scalar>(values: impl IntoIterator<Item = &'a S>) -> S {
    let mut best = S::zero();
    for v in values {
        let a = v.abs();
        if a > best {
            best = a;
        }
    }
    best
}

/// Converts a slice of `i64` into scalars.
pub fn from_ints<S: Scalar>(v: &[i64]) -> Vec<S> {
    v.iter().map(|&x| S::from_i64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        assert_eq!(Rational::parse_literal("3/4"), Some(Rational::from_ratio(3, 4)));
        assert_eq!(Rational::parse_literal("-1.25"), Some(Rational::from_ratio(-5, 4)));
        assert_eq!(Rational::parse_literal("7"), Some(Rational::from_i64(7)));
        assert_eq!(Rational::parse_literal("1/0"), None);
        assert_eq!(Rational::parse_literal("x"), None);
    }

    #[test]
    fn float_negligible_uses_tolerance() {
        assert!(1e-13f64.is_negligible());
        assert!(!1e-9f64.is_negligible());
        assert_eq!(f64::parse_literal("1/4"), Some(0.25));
    }
}
