//! Exact arithmetic shared by every other module.
//!
//! Everything that decides a correctness-bearing inequality lives here: big
//! rationals, Cantor-series scale sequences with memoized prefix products,
//! rigorous binary-logarithm enclosures, and exact sums of rational radicals
//! (used for `|U|^s` with a rational exponent `s`).

mod log2;
mod qseq;
mod surd;

pub use log2::{floor_log2_ratio, log2_bounds, log2_bounds_factored};
pub use qseq::{Factored, QKind, QSequence};
pub use surd::{Exponent, Surd, SurdError};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary-precision exact fraction, always stored reduced with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("malformed Q-sequence spec `{0}`")]
    InvalidQSpec(String),
    #[error("Q-sequence term n_{k} requested but the explicit list has only {len} terms")]
    ListExhausted { k: usize, len: usize },
    #[error("Q-sequence terms must be at least 2, got {0}")]
    TermTooSmall(BigUint),
    #[error("expected a positive value, got {0}")]
    NonPositive(Rational),
    #[error("malformed rational `{0}`")]
    InvalidRational(String),
    #[error("{what} is too large to materialize")]
    TooLarge { what: String },
}

/// `n/d` as a reduced rational. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_from_uint(n: BigUint, d: BigUint) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Parses `a`, `a/b` or `-a/b`.
pub fn parse_rational(text: &str) -> Result<Rational, NumericError> {
    let bad = || NumericError::InvalidRational(text.to_string());
    let t = text.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Lossy conversion for report formatting only.
pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large operands: scale both sides down to a common bit budget.
    let n = x.numer().abs().to_biguint().unwrap_or_default();
    let d = x.denom().to_biguint().unwrap_or_default();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let nf = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    let df = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
    let v = nf / df;
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// `2^e` as a rational (`e` may be negative).
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// The unique `r` with `2^{-r-1} < x <= 2^{-r}`.
///
/// For `x <= 1` this is the nonnegative scale at which `x` sits; it is defined
/// (and negative) for `x > 1` as well. Only integer arithmetic is used.
pub fn floor_log2_rational_inverse(x: &Rational) -> Result<i64, NumericError> {
    if !x.is_positive() {
        return Err(NumericError::NonPositive(x.clone()));
    }
    let n = x.numer().to_biguint().expect("positive");
    let d = x.denom().to_biguint().expect("positive");
    // 2^r <= d/n < 2^{r+1}
    Ok(floor_log2_ratio(&d, &n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_log2_inverse_examples() {
        assert_eq!(floor_log2_rational_inverse(&rat(1, 8)).unwrap(), 3);
        assert_eq!(floor_log2_rational_inverse(&rat(5, 24)).unwrap(), 2);
        assert_eq!(floor_log2_rational_inverse(&rat(1, 1)).unwrap(), 0);
        assert_eq!(floor_log2_rational_inverse(&rat(3, 1)).unwrap(), -2);
        assert!(floor_log2_rational_inverse(&rat(0, 1)).is_err());
        assert!(floor_log2_rational_inverse(&rat(-1, 3)).is_err());
    }

    #[test]
    fn floor_log2_inverse_brackets() {
        for d in 1..200i64 {
            for n in 1..=d {
                let x = rat(n, d);
                let r = floor_log2_rational_inverse(&x).unwrap();
                assert!(pow2(-r - 1) < x && x <= pow2(-r), "{x} -> {r}");
            }
        }
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("5/24").unwrap(), rat(5, 24));
        assert_eq!(parse_rational(" 10/4 ").unwrap(), rat(5, 2));
        assert_eq!(parse_rational("3").unwrap(), rat(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(6, 3)), "2");
        assert_eq!(format_rational(&rat(-1, 3)), "-1/3");
    }
}
