//! Exact sums of rational multiples of `root`-th roots of positive integers.
//!
//! `|U|^s` with `s = p/q` is irrational in general, so supergale masses are
//! kept as `sum_i c_i * t_i^{1/q}` with rational `c_i` and `q`-th-power-free
//! integer radicands `t_i`. Distinct power-free radicands have roots that are
//! linearly independent over the rationals, so a sum is zero exactly when all
//! of its coefficients vanish; any nonzero sum has its sign settled by interval
//! refinement, which is guaranteed to terminate.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::Rational;

const TRIAL_BOUND: u64 = 1 << 16;
const MAX_REFINE_BITS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurdError {
    #[error("exponent must be a nonnegative rational with small numerator and denominator, got {0}")]
    BadExponent(Rational),
    #[error("could not decide the sign of a radical sum within {MAX_REFINE_BITS} bits")]
    Undecided,
}

/// A nonnegative rational exponent `num/den` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    num: u32,
    den: u32,
}

impl Exponent {
    pub fn new(num: u32, den: u32) -> Self {
        assert!(den > 0);
        let g = num.gcd(&den).max(1);
        Exponent { num: num / g, den: den / g }
    }

    pub fn from_rational(s: &Rational) -> Result<Self, SurdError> {
        let bad = || SurdError::BadExponent(s.clone());
        if s.is_negative() {
            return Err(bad());
        }
        let num = s.numer().to_u32().ok_or_else(bad)?;
        let den = s.denom().to_u32().ok_or_else(bad)?;
        Ok(Exponent::new(num, den))
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn as_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.num), BigInt::from(self.den))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `sum coef * radicand^{1/root}`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    root: u32,
    terms: BTreeMap<BigUint, Rational>,
    // false if some radicand could not be fully factored
    certain: bool,
}

#[derive(Clone)]
struct Factorization {
    primes: Vec<(BigUint, u64)>,
    certain: bool,
}

fn factor_cache() -> &'static Mutex<HashMap<BigUint, Factorization>> {
    static CACHE: OnceLock<Mutex<HashMap<BigUint, Factorization>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn factorize(n: &BigUint) -> Factorization {
    if let Some(f) = factor_cache().lock().expect("poisoned").get(n) {
        return f.clone();
    }
    let mut primes = Vec::new();
    let mut rest = n.clone();
    if let Some(tz) = rest.trailing_zeros().filter(|&t| t > 0) {
        primes.push((BigUint::from(2u32), tz));
        rest >>= tz;
    }
    let mut p = 3u64;
    while p < TRIAL_BOUND && BigUint::from(p * p) <= rest {
        let bp = BigUint::from(p);
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            primes.push((bp, e));
        }
        p += 2;
    }
    let mut certain = true;
    if rest > BigUint::one() {
        // Below TRIAL_BOUND^2 the cofactor is prime; above it, only perfect
        // powers of a single cofactor are detected.
        if rest >= BigUint::from(TRIAL_BOUND * TRIAL_BOUND) {
            let mut found = false;
            for e in (2..=rest.bits() as u32).rev() {
                let r = rest.nth_root(e);
                if r.pow(e) == rest {
                    primes.push((r, e as u64));
                    found = true;
                    break;
                }
            }
            if !found {
                primes.push((rest, 1));
            }
            certain = false;
        } else {
            primes.push((rest, 1));
        }
    }
    let f = Factorization { primes, certain };
    factor_cache().lock().expect("poisoned").insert(n.clone(), f.clone());
    f
}

/// Splits `prod p^{e}` into `(outer, inner)` with `outer^root * inner` equal to
/// it and `inner` root-th-power-free.
fn split_power(exps: &BTreeMap<BigUint, u64>, root: u32) -> (BigUint, BigUint) {
    let mut outer = BigUint::one();
    let mut inner = BigUint::one();
    for (p, &e) in exps {
        let q = e / root as u64;
        let r = e % root as u64;
        if q > 0 {
            outer *= p.pow(q as u32);
        }
        if r > 0 {
            inner *= p.pow(r as u32);
        }
    }
    (outer, inner)
}

fn add_exps(into: &mut BTreeMap<BigUint, u64>, f: &Factorization, times: u64) {
    for (p, e) in &f.primes {
        *into.entry(p.clone()).or_insert(0) += e * times;
    }
}

impl Surd {
    pub fn zero(root: u32) -> Self {
        Surd { root: root.max(1), terms: BTreeMap::new(), certain: true }
    }

    pub fn from_rational(root: u32, r: Rational) -> Self {
        let mut s = Surd::zero(root);
        if !r.is_zero() {
            s.terms.insert(BigUint::one(), r);
        }
        s
    }

    pub fn one(root: u32) -> Self {
        Surd::from_rational(root, Rational::one())
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(coefficient, radicand)` pairs in radicand order.
    pub fn terms(&self) -> impl Iterator<Item = (&BigUint, &Rational)> {
        self.terms.iter()
    }

    /// Builds `sum coef * radicand^{1/root}` from arbitrary positive radicands.
    pub fn from_terms(root: u32, terms: impl IntoIterator<Item = (BigUint, Rational)>) -> Self {
        let mut s = Surd::zero(root);
        for (t, c) in terms {
            s = s + Surd::radical(root, &t).scale(&c);
        }
        s
    }

    /// `t^{1/root}` for a positive integer `t`, normalized.
    pub fn radical(root: u32, t: &BigUint) -> Self {
        assert!(!t.is_zero(), "radicand must be positive");
        let f = factorize(t);
        let mut exps = BTreeMap::new();
        add_exps(&mut exps, &f, 1);
        let (outer, inner) = split_power(&exps, root);
        let mut s = Surd::zero(root);
        s.terms.insert(inner, Rational::from_integer(outer.into()));
        s.certain = f.certain;
        s
    }

    /// `base^s` exactly, for a nonnegative rational base.
    pub fn power(base: &Rational, s: Exponent) -> Self {
        assert!(!base.is_negative(), "negative base");
        let root = s.den;
        if s.num == 0 {
            return Surd::one(root);
        }
        if base.is_zero() {
            return Surd::zero(root);
        }
        // (a/b)^{p/q} = (a^p b^{p(q-1)})^{1/q} / b^p
        let a = base.numer().to_biguint().expect("nonnegative");
        let b = base.denom().to_biguint().expect("positive");
        let fa = factorize(&a);
        let fb = factorize(&b);
        let p = s.num as u64;
        let mut exps = BTreeMap::new();
        add_exps(&mut exps, &fa, p);
        add_exps(&mut exps, &fb, p * (root as u64 - 1));
        let (outer, inner) = split_power(&exps, root);
        let coef = Rational::new(outer.into(), b.pow(s.num).into());
        let mut out = Surd::zero(root);
        out.terms.insert(inner, coef);
        out.certain = fa.certain && fb.certain;
        out
    }

    /// The same value over the root `new_root`, which must be a multiple of the current one.
    pub fn lift(&self, new_root: u32) -> Self {
        assert!(new_root.is_multiple_of(self.root), "root {new_root} is not a multiple of {}", self.root);
        let k = new_root / self.root;
        if k == 1 {
            return self.clone();
        }
        Surd {
            root: new_root,
            terms: self.terms.iter().map(|(t, c)| (t.pow(k), c.clone())).collect(),
            certain: self.certain,
        }
    }

    fn unify(a: &Surd, b: &Surd) -> (Surd, Surd) {
        if a.root == b.root {
            return (a.clone(), b.clone());
        }
        let l = a.root.lcm(&b.root);
        (a.lift(l), b.lift(l))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Surd::zero(self.root);
        }
        Surd {
            root: self.root,
            terms: self.terms.iter().map(|(t, x)| (t.clone(), x * c)).collect(),
            certain: self.certain,
        }
    }

    /// The rational value, if this sum has no irrational part.
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&BigUint::one()).cloned(),
            _ => None,
        }
    }

    /// Rational enclosure `lo <= value <= hi` with width about `2^{-bits}` per term.
    pub fn bounds(&self, bits: u64) -> (Rational, Rational) {
        let mut lo = Rational::zero();
        let mut hi = Rational::zero();
        let scale = BigUint::one() << bits;
        for (t, c) in &self.terms {
            let (rl, rh) = if t.is_one() {
                (Rational::one(), Rational::one())
            } else {
                let shifted = t << (bits * self.root as u64);
                let r = shifted.nth_root(self.root);
                let exact = r.pow(self.root) == shifted;
                let l = Rational::new(r.clone().into(), scale.clone().into());
                let h = if exact { l.clone() } else { Rational::new((r + 1u32).into(), scale.clone().into()) };
                (l, h)
            };
            if c.is_positive() {
                lo += c * rl;
                hi += c * rh;
            } else {
                lo += c * rh;
                hi += c * rl;
            }
        }
        (lo, hi)
    }

    pub fn to_f64(&self) -> f64 {
        let (lo, hi) = self.bounds(64);
        (super::to_f64(&lo) + super::to_f64(&hi)) / 2.0
    }

    /// Exact sign.
    pub fn signum(&self) -> Result<std::cmp::Ordering, SurdError> {
        use std::cmp::Ordering::*;
        if self.terms.is_empty() {
            return Ok(Equal);
        }
        if self.terms.len() == 1 || self.terms.values().all(|c| c.is_positive()) {
            return Ok(if self.terms.values().next().unwrap().is_positive() { Greater } else { Less });
        }
        if self.terms.values().all(|c| c.is_negative()) {
            return Ok(Less);
        }
        let mut bits = 32;
        while bits <= MAX_REFINE_BITS {
            let (lo, hi) = self.bounds(bits);
            if lo.is_positive() {
                return Ok(Greater);
            }
            if hi.is_negative() {
                return Ok(Less);
            }
            bits *= 2;
        }
        Err(SurdError::Undecided)
    }

    pub fn try_cmp(&self, other: &Surd) -> Result<std::cmp::Ordering, SurdError> {
        (self.clone() - other.clone()).signum()
    }

    /// Exact `floor(log2(value))` for a positive value.
    pub fn floor_log2(&self) -> Result<i64, SurdError> {
        assert_eq!(self.signum()?, std::cmp::Ordering::Greater, "floor_log2 of nonpositive value");
        let (lo, hi) = self.bounds(64);
        let guess = if lo.is_positive() {
            super::floor_log2_rational_inverse(&lo.recip()).map(|r| -r).unwrap_or(0)
        } else {
            super::floor_log2_rational_inverse(&hi.recip()).map(|r| -r).unwrap_or(0)
        };
        // adjust: find e with 2^e <= v < 2^{e+1}
        let mut e = guess;
        loop {
            let below = self.try_cmp(&Surd::from_rational(1, super::pow2(e)))?;
            if below == std::cmp::Ordering::Less {
                e -= 1;
                continue;
            }
            let above = self.try_cmp(&Surd::from_rational(1, super::pow2(e + 1)))?;
            if above != std::cmp::Ordering::Less {
                e += 1;
                continue;
            }
            return Ok(e);
        }
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let (mut a, b) = Surd::unify(&self, &rhs);
        for (t, c) in b.terms {
            *a.terms.entry(t).or_insert_with(Rational::zero) += c;
        }
        a.terms.retain(|_, c| !c.is_zero());
        a.certain &= b.certain;
        a
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.scale(&-Rational::one())
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        let (a, b) = Surd::unify(self, rhs);
        let root = a.root;
        let mut out = Surd::zero(root);
        out.certain = a.certain && b.certain;
        for (ta, ca) in &a.terms {
            for (tb, cb) in &b.terms {
                let coef = ca * cb;
                let term = if ta.is_one() || tb.is_one() {
                    let mut s = Surd::zero(root);
                    s.terms.insert(ta * tb, coef);
                    s
                } else {
                    let mut exps = BTreeMap::new();
                    add_exps(&mut exps, &factorize(ta), 1);
                    add_exps(&mut exps, &factorize(tb), 1);
                    let (outer, inner) = split_power(&exps, root);
                    let mut s = Surd::zero(root);
                    s.terms.insert(inner, coef * Rational::from_integer(outer.into()));
                    s
                };
                out = out + term;
            }
        }
        out
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let c = super::format_rational(c);
                if t.is_one() {
                    c
                } else if self.root == 2 {
                    format!("{c}*sqrt({t})")
                } else {
                    format!("{c}*{t}^(1/{})", self.root)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
