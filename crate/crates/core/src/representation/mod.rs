//! Digit-level codecs between exact rationals and the three expansions the
//! families are built on: Cantor series (mixed radix), binary, and regular
//! continued fractions.

mod format;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::covering::CoveringSet;
use crate::numeric::{format_rational, NumericError, QSequence, Rational};

pub use format::{parse_digits, write_digits};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReprError {
    #[error("value {0} lies outside [0, 1]")]
    OutOfRange(String),
    #[error("digit {digit} at position {k} is out of range (must be < {bound})")]
    DigitOutOfRange { k: usize, digit: String, bound: String },
    #[error("{0} has no continued fraction of the form [a1, a2, ...] in (0, 1)")]
    NoContinuedFraction(String),
    #[error("continued-fraction terms must be positive")]
    BadTerm,
    #[error("malformed representation spec `{0}`")]
    InvalidSpec(String),
    #[error("malformed digit input: {0}")]
    Parse(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// A finite binary expansion of a fractional part, most significant bit first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitSequence {
    bits: Vec<bool>,
}

impl BitSequence {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSequence { bits }
    }

    pub fn zeros(n: usize) -> Self {
        BitSequence { bits: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_vec(self) -> Vec<bool> {
        self.bits
    }

    pub fn prefix(&self, n: usize) -> &[bool] {
        &self.bits[..n]
    }

    /// `sum b_i 2^{-i}`.
    pub fn value(&self) -> Rational {
        let mut num = BigUint::zero();
        for &b in &self.bits {
            num <<= 1u8;
            if b {
                num += 1u32;
            }
        }
        Rational::new(num.into(), (BigUint::one() << self.bits.len()).into())
    }

    /// Parses a packed string of `0`/`1` characters (whitespace ignored).
    pub fn parse(text: &str) -> Result<Self, ReprError> {
        let mut bits = Vec::with_capacity(text.len());
        for c in text.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() => {}
                c => return Err(ReprError::Parse(format!("unexpected character `{c}` in bit string"))),
            }
        }
        Ok(BitSequence { bits })
    }
}

impl fmt::Display for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.len() <= 64 {
            write!(f, "BitSequence({self})")
        } else {
            write!(f, "BitSequence(len={})", self.bits.len())
        }
    }
}

impl From<Vec<bool>> for BitSequence {
    fn from(bits: Vec<bool>) -> Self {
        BitSequence { bits }
    }
}

/// Digits `a_1..a_K` of a Cantor series expansion, `0 <= a_k < n_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorDigits {
    pub q: Arc<QSequence>,
    pub digits: Vec<BigUint>,
}

/// A continued-fraction word `[a_1, ..., a_n]` with positive terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfWord {
    terms: Vec<BigUint>,
}

impl CfWord {
    pub fn new(terms: Vec<BigUint>) -> Result<Self, ReprError> {
        if terms.iter().any(|t| t.is_zero()) {
            return Err(ReprError::BadTerm);
        }
        Ok(CfWord { terms })
    }

    pub fn from_u64(terms: &[u64]) -> Result<Self, ReprError> {
        Self::new(terms.iter().map(|&t| BigUint::from(t)).collect())
    }

    pub fn terms(&self) -> &[BigUint] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical words never end in 1 unless they are exactly `[1]`.
    pub fn is_canonical(&self) -> bool {
        self.terms.len() < 2 || !self.terms.last().expect("nonempty").is_one()
    }

    pub fn extended(&self, a: BigUint) -> Self {
        let mut terms = self.terms.clone();
        terms.push(a);
        CfWord { terms }
    }

    /// `1 / (a_1 + 1 / (a_2 + ...))`; the empty word evaluates to 0.
    pub fn value(&self) -> Rational {
        cf_value(&self.terms)
    }

    /// Injective index of a word among words of the same length: the bit
    /// string `1 0^{a_1-1} 1 0^{a_2-1} 1 ...`, read in binary, minus one.
    pub fn index(&self) -> BigUint {
        let mut idx = BigUint::one();
        for a in &self.terms {
            let shift = a.to_u64().expect("partial quotient fits in u64");
            idx = (idx << shift) | BigUint::one();
        }
        idx - 1u32
    }

    pub fn from_index(index: &BigUint) -> Self {
        let code = index + 1u32;
        let bits = code.bits();
        let mut terms = Vec::new();
        let mut zeros = 0u64;
        for i in (0..bits.saturating_sub(1)).rev() {
            if code.bit(i) {
                terms.push(BigUint::from(zeros + 1));
                zeros = 0;
            } else {
                zeros += 1;
            }
        }
        CfWord { terms }
    }
}

impl fmt::Display for CfWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

fn check_unit(x: &Rational) -> Result<(), ReprError> {
    if x.is_negative() || x > &Rational::one() {
        Err(ReprError::OutOfRange(format_rational(x)))
    } else {
        Ok(())
    }
}

/// Greedy Cantor series digits of `x` to depth `depth`.
///
/// Grid points get the terminating expansion (trailing zeros). `x = 1` has no
/// finite expansion and is clamped to `n_k - 1` at every level.
pub fn cantor_encode(x: &Rational, q: &Arc<QSequence>, depth: usize) -> Result<CantorDigits, ReprError> {
    check_unit(x)?;
    let mut r = x.clone();
    let mut digits = Vec::with_capacity(depth);
    for k in 1..=depth {
        let n = q.term(k)?;
        let scaled = r * Rational::from_integer(BigInt::from(n.clone()));
        let top = BigInt::from(n - 1u32);
        let a = scaled.floor().to_integer().min(top);
        r = scaled - Rational::from_integer(a.clone());
        digits.push(a.to_biguint().expect("nonnegative digit"));
    }
    Ok(CantorDigits { q: Arc::clone(q), digits })
}

/// `sum a_k / Q_k`, exact.
pub fn cantor_decode(d: &CantorDigits) -> Result<Rational, ReprError> {
    let mut num = BigUint::zero();
    for (i, a) in d.digits.iter().enumerate() {
        let k = i + 1;
        let n = d.q.term(k)?;
        if a >= &n {
            return Err(ReprError::DigitOutOfRange { k, digit: a.to_string(), bound: n.to_string() });
        }
        num = num * n + a;
    }
    let den = d.q.product_prefix(d.digits.len())?;
    Ok(Rational::new(num.into(), den.into()))
}

/// First `n` bits of the terminating binary expansion of `x` (`x = 1` clamps to all ones).
pub fn binary_expansion(x: &Rational, n: usize) -> Result<BitSequence, ReprError> {
    check_unit(x)?;
    let num = x.numer().to_biguint().expect("nonnegative");
    let den = x.denom().to_biguint().expect("positive");
    if num == den {
        return Ok(BitSequence::new(vec![true; n]));
    }
    // floor(x * 2^n) written in n bits
    let v = (num << n) / den;
    let bits = (0..n).rev().map(|i| v.bit(i as u64)).collect();
    Ok(BitSequence::new(bits))
}

/// Regular continued fraction of `x` in (0, 1) by the Euclidean algorithm.
/// The result is canonical: its last term is at least 2 whenever it has more
/// than one term.
pub fn cf_expansion(x: &Rational) -> Result<CfWord, ReprError> {
    if !x.is_positive() || x >= &Rational::one() {
        return Err(ReprError::NoContinuedFraction(format_rational(x)));
    }
    let mut n = x.numer().to_biguint().expect("positive");
    let mut d = x.denom().to_biguint().expect("positive");
    let mut terms = Vec::new();
    while !n.is_zero() {
        let (a, r) = d.div_rem(&n);
        terms.push(a);
        d = n;
        n = r;
    }
    Ok(CfWord { terms })
}

pub fn cf_value(terms: &[BigUint]) -> Rational {
    let mut v = Rational::zero();
    for a in terms.iter().rev() {
        v = (Rational::from_integer(BigInt::from(a.clone())) + v).recip();
    }
    v
}

/// Exact endpoints of the cylinder `C_u`: between `[u]` and `[u with a_n + 1]`,
/// with `[u]` on the right for odd `n` and on the left for even `n`.
pub fn cf_cylinder_bounds(terms: &[BigUint]) -> (Rational, Rational) {
    if terms.is_empty() {
        return (Rational::zero(), Rational::one());
    }
    let a = cf_value(terms);
    let mut bumped = terms.to_vec();
    *bumped.last_mut().expect("nonempty") += 1u32;
    let b = cf_value(&bumped);
    if terms.len().is_multiple_of(2) {
        (a, b)
    } else {
        (b, a)
    }
}

pub const CF_FAMILY_ID: &str = "cf";

/// The covering set of the continued-fraction family for word `u`.
pub fn cf_cylinder(u: &CfWord) -> CoveringSet {
    let (lo, hi) = cf_cylinder_bounds(&u.terms);
    CoveringSet::new(Arc::from(CF_FAMILY_ID), u.len() as u32, u.index(), lo, hi)
}

/// The two continued-fraction words of a rational in (0, 1]: the canonical
/// one, and (when it exists) the variant ending in 1.
pub fn cf_forms(x: &Rational) -> Vec<CfWord> {
    if x.is_one() {
        return vec![CfWord { terms: vec![BigUint::one()] }];
    }
    let Ok(w) = cf_expansion(x) else { return Vec::new() };
    let mut out = vec![w.clone()];
    let last = w.terms.last().expect("nonempty");
    if *last >= BigUint::from(2u32) {
        let mut alt = w.terms.clone();
        *alt.last_mut().expect("nonempty") -= 1u32;
        alt.push(BigUint::one());
        out.push(CfWord { terms: alt });
    }
    out
}

/// A representation target or source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReprSpec {
    Binary,
    Base(u32),
    Cantor(Arc<QSequence>),
    Cf,
}

impl ReprSpec {
    /// `binary`, `base:B` (or `base-B`), `cantor:<Q-spec>`, `cf`.
    pub fn parse(spec: &str) -> Result<Self, ReprError> {
        let bad = || ReprError::InvalidSpec(spec.to_string());
        let s = spec.trim();
        if s == "binary" {
            return Ok(ReprSpec::Binary);
        }
        if s == "cf" {
            return Ok(ReprSpec::Cf);
        }
        if let Some(b) = s.strip_prefix("base:").or_else(|| s.strip_prefix("base-")) {
            let b: u32 = b.parse().map_err(|_| bad())?;
            if b < 2 {
                return Err(bad());
            }
            return Ok(ReprSpec::Base(b));
        }
        if let Some(q) = s.strip_prefix("cantor:") {
            let q = QSequence::parse(q).map_err(|_| bad())?;
            return Ok(ReprSpec::Cantor(Arc::new(q)));
        }
        Err(bad())
    }
}

impl fmt::Display for ReprSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReprSpec::Binary => f.write_str("binary"),
            ReprSpec::Base(b) => write!(f, "base:{b}"),
            ReprSpec::Cantor(q) => write!(f, "cantor:{q}"),
            ReprSpec::Cf => f.write_str("cf"),
        }
    }
}

/// Digits in one of the supported representations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Digits {
    Bits(BitSequence),
    Radix { base: u32, digits: Vec<u32> },
    Cantor(CantorDigits),
    Cf(CfWord),
}

impl Digits {
    pub fn spec(&self) -> ReprSpec {
        match self {
            Digits::Bits(_) => ReprSpec::Binary,
            Digits::Radix { base, .. } => ReprSpec::Base(*base),
            Digits::Cantor(d) => ReprSpec::Cantor(Arc::clone(&d.q)),
            Digits::Cf(_) => ReprSpec::Cf,
        }
    }

    pub fn value(&self) -> Result<Rational, ReprError> {
        match self {
            Digits::Bits(b) => Ok(b.value()),
            Digits::Radix { base, digits } => {
                let q = Arc::new(QSequence::constant(*base as u64)?);
                cantor_decode(&CantorDigits { q, digits: digits.iter().map(|&d| d.into()).collect() })
            }
            Digits::Cantor(d) => cantor_decode(d),
            Digits::Cf(w) => Ok(w.value()),
        }
    }

    /// Digit strings, one per position, as written to digit files.
    pub fn digit_strings(&self) -> Vec<String> {
        match self {
            Digits::Bits(b) => b.as_slice().iter().map(|&x| u8::from(x).to_string()).collect(),
            Digits::Radix { digits, .. } => digits.iter().map(|d| d.to_string()).collect(),
            Digits::Cantor(d) => d.digits.iter().map(|d| d.to_string()).collect(),
            Digits::Cf(w) => w.terms.iter().map(|d| d.to_string()).collect(),
        }
    }
}

/// Encodes `x` in `spec` to `depth` positions. Continued fractions are exact
/// and are truncated to `depth` terms only when longer.
pub fn encode(x: &Rational, spec: &ReprSpec, depth: usize) -> Result<Digits, ReprError> {
    Ok(match spec {
        ReprSpec::Binary => Digits::Bits(binary_expansion(x, depth)?),
        ReprSpec::Base(b) => {
            let q = Arc::new(QSequence::constant(*b as u64)?);
            let d = cantor_encode(x, &q, depth)?;
            Digits::Radix {
                base: *b,
                digits: d.digits.iter().map(|v| v.to_u32().expect("digit < base")).collect(),
            }
        }
        ReprSpec::Cantor(q) => Digits::Cantor(cantor_encode(x, q, depth)?),
        ReprSpec::Cf => {
            let mut w = cf_expansion(x)?;
            w.terms.truncate(depth);
            Digits::Cf(w)
        }
    })
}

/// Decodes `digits` to an exact rational and re-encodes it in `to`.
pub fn rebase(digits: &Digits, to: &ReprSpec, depth: usize) -> Result<Digits, ReprError> {
    let x = digits.value()?;
    encode(&x, to, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use proptest::prelude::*;

    fn q(spec: &str) -> Arc<QSequence> {
        Arc::new(QSequence::parse(spec).unwrap())
    }

    fn digits(d: &CantorDigits) -> Vec<u64> {
        d.digits.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    #[test]
    fn cantor_encode_examples() {
        let q234 = q("list:2,3,4");
        assert_eq!(digits(&cantor_encode(&rat(5, 24), &q234, 3).unwrap()), vec![0, 1, 1]);
        assert_eq!(digits(&cantor_encode(&rat(1, 2), &q("const:2"), 3).unwrap()), vec![1, 0, 0]);
        let top = cantor_encode(&rat(1, 1), &q234, 2).unwrap();
        assert_eq!(digits(&top), vec![1, 2]);
        assert_eq!(rat(1, 1) - cantor_decode(&top).unwrap(), rat(1, 6));
        assert!(cantor_encode(&rat(3, 2), &q234, 2).is_err());
    }

    #[test]
    fn cantor_decode_examples() {
        let q234 = q("list:2,3,4");
        let d = |v: &[u64]| CantorDigits { q: Arc::clone(&q234), digits: v.iter().map(|&x| x.into()).collect() };
        assert_eq!(cantor_decode(&d(&[0, 1, 1])).unwrap(), rat(5, 24));
        assert_eq!(cantor_decode(&d(&[0, 0, 0])).unwrap(), rat(0, 1));
        assert_eq!(cantor_decode(&d(&[1, 2, 3])).unwrap(), rat(23, 24));
        assert!(matches!(cantor_decode(&d(&[0, 3, 0])), Err(ReprError::DigitOutOfRange { k: 2, .. })));
    }

    #[test]
    fn binary_examples() {
        assert_eq!(binary_expansion(&rat(1, 3), 4).unwrap().to_string(), "0101");
        assert_eq!(binary_expansion(&rat(1, 2), 3).unwrap().to_string(), "100");
        assert_eq!(binary_expansion(&rat(0, 1), 5).unwrap().to_string(), "00000");
        assert_eq!(binary_expansion(&rat(1, 1), 3).unwrap().to_string(), "111");
    }

    #[test]
    fn cf_examples() {
        assert_eq!(cf_expansion(&rat(1, 2)).unwrap().to_string(), "[2]");
        assert_eq!(cf_expansion(&rat(2, 3)).unwrap().to_string(), "[1,2]");
        assert_eq!(cf_expansion(&rat(5, 24)).unwrap().to_string(), "[4,1,4]");
        assert!(cf_expansion(&rat(0, 1)).is_err());
        assert!(cf_expansion(&rat(1, 1)).is_err());
    }

    #[test]
    fn cylinder_examples() {
        let c = |t: &[u64]| cf_cylinder(&CfWord::from_u64(t).unwrap());
        let s = c(&[2]);
        assert_eq!((s.lo().clone(), s.hi().clone()), (rat(1, 3), rat(1, 2)));
        let s = c(&[1, 2]);
        assert_eq!((s.lo().clone(), s.hi().clone()), (rat(2, 3), rat(3, 4)));
        assert_eq!(s.diameter(), rat(1, 12));
        let s = c(&[1]);
        assert_eq!((s.lo().clone(), s.hi().clone()), (rat(1, 2), rat(1, 1)));
    }

    #[test]
    fn cf_forms_of_grid_point() {
        let forms: Vec<String> = cf_forms(&rat(1, 2)).iter().map(|w| w.to_string()).collect();
        assert_eq!(forms, vec!["[2]", "[1,1]"]);
        assert_eq!(cf_forms(&rat(1, 1))[0].to_string(), "[1]");
        assert!(cf_forms(&rat(0, 1)).is_empty());
    }

    #[test]
    fn rebase_examples() {
        let src = Digits::Bits(BitSequence::parse("0101").unwrap());
        let out = rebase(&src, &ReprSpec::Cantor(q("list:2,3,4")), 3).unwrap();
        assert_eq!(out.value().unwrap(), rat(5, 16) - rat(1, 48));
        let Digits::Cantor(d) = &out else { panic!() };
        assert_eq!(digits(d), vec![0, 1, 3]);

        let src = Digits::Cantor(CantorDigits { q: q("list:2,3"), digits: vec![1u32.into(), 0u32.into()] });
        assert_eq!(write_digits(&rebase(&src, &ReprSpec::Binary, 4).unwrap()), "1000\n");

        let src = Digits::Cf(CfWord::from_u64(&[2]).unwrap());
        assert_eq!(write_digits(&rebase(&src, &ReprSpec::Binary, 3).unwrap()), "100\n");
    }

    #[test]
    fn cf_index_is_injective_per_level() {
        let mut seen = std::collections::HashSet::new();
        for a in 1..6u64 {
            for b in 1..6u64 {
                let w = CfWord::from_u64(&[a, b]).unwrap();
                assert_eq!(CfWord::from_index(&w.index()), w);
                assert!(seen.insert(w.index()));
            }
        }
        assert_eq!(CfWord::from_u64(&[]).unwrap().index(), BigUint::zero());
    }

    proptest! {
        #[test]
        fn cantor_round_trip(num in 0u64..100_000, den in 1u64..100_000, which in 0usize..3) {
            prop_assume!(num < den);
            let spec = ["const:2", "list:2,3,4", "pow2:"][which];
            let qs = q(spec);
            let depth = if which == 1 { 3 } else { 12 };
            let x = rat(num as i64, den as i64);
            let d = cantor_encode(&x, &qs, depth).unwrap();
            let v = cantor_decode(&d).unwrap();
            let cell = Rational::new(1.into(), qs.product_prefix(depth).unwrap().into());
            prop_assert!(v <= x && x < v + cell);
        }

        #[test]
        fn cylinders_nest(terms in proptest::collection::vec(1u64..20, 1..6), next in 1u64..20) {
            let u = CfWord::from_u64(&terms).unwrap();
            let outer = cf_cylinder(&u);
            let inner = cf_cylinder(&u.extended(next.into()));
            prop_assert!(outer.contains(&inner) && inner != outer);
            // orientation: [u] is the right endpoint for odd length
            let v = u.value();
            if terms.len() % 2 == 1 { prop_assert_eq!(outer.hi(), &v) } else { prop_assert_eq!(outer.lo(), &v) }
        }

        #[test]
        fn binary_prefix_values_increase(num in 0u64..10_000, den in 1u64..10_000, n in 1usize..40) {
            prop_assume!(num < den);
            let x = rat(num as i64, den as i64);
            let a = binary_expansion(&x, n).unwrap().value();
            let b = binary_expansion(&x, n + 1).unwrap().value();
            prop_assert!(a <= b && b <= x);
            prop_assert!(x - a < crate::numeric::pow2(-(n as i64)));
        }
    }
}
