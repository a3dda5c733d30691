//! Exact rational scalars and vectors.
//!
//! Constraint values, rotation vectors and periodic-orbit bookkeeping use
//! arbitrary-precision rationals so that statements like "the Birkhoff sum
//! equals M times the target" can be checked with equality instead of a
//! tolerance. Potentials stay in floating point.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<BigInt>;

/// Parses "p", "p/q" or "-p/q" with integer parts. Rejects zero or
/// non-integer denominators.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::ParseRational { input: s.to_string() };
    let s = s.trim();
    if s.is_empty() {
        return Err(bad());
    }
    let (num_str, den_str) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (s, None),
    };
    let numer: BigInt = num_str.parse().map_err(|_| bad())?;
    let denom: BigInt = match den_str {
        Some(d) => d.parse().map_err(|_| bad())?,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(Ratio::new(numer, denom))
}

/// Canonical "p/q" form (denominator always printed, in lowest terms).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_from_i64(n: i64, d: i64) -> Rational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

pub fn vec_to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(to_f64).collect()
}

pub fn vec_add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(a: &[Rational], t: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * t).collect()
}

pub fn vec_zero(dim: usize) -> Vec<Rational> {
    vec![Rational::zero(); dim]
}

/// Euclidean norm after conversion to f64.
pub fn vec_norm_f64(a: &[Rational]) -> f64 {
    a.iter().map(|x| to_f64(x).powi(2)).sum::<f64>().sqrt()
}

/// Least common multiple of the denominators of all entries.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> BigInt {
    let mut acc = BigInt::one();
    for v in values {
        acc = acc.lcm(v.denom());
    }
    acc.abs()
}

pub fn parse_rational_vec(parts: &[String]) -> Result<Vec<Rational>> {
    parts.iter().map(|s| parse_rational(s)).collect()
}

pub fn format_rational_vec(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}
