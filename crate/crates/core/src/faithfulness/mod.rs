//! The log-limit condition `λ_k = log n_k / log(n_1 ... n_{k-1}) -> 0` for
//! Cantor-series coverings, computed term by term, plus a heuristic
//! classifier. A limit cannot be decided from finitely many terms, so every
//! verdict is phrased as evidence and carries the window and tolerances used.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::numeric::{log2_bounds_factored, pow2, rat_from_uint, to_f64, NumericError, QSequence, Rational};

/// Enclosures are refined until their width is below `2^-PRECISION_BITS`.
pub const PRECISION_BITS: i64 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FaithfulnessError {
    #[error("k_max must be at least 2, got {0}")]
    KMaxTooSmall(usize),
    #[error("window k = {lo}..={hi} is not inside the profile (k = 2..={max})")]
    BadWindow { lo: usize, hi: usize, max: usize },
    #[error("tolerances must be positive")]
    BadTolerance,
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    ConvergesToZero,
    BoundedAway,
    Inconclusive,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ConvergesToZero => "evidence-converges-to-zero",
            Verdict::BoundedAway => "evidence-bounded-away",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLimitTerm {
    pub k: usize,
    /// Exact when `exact`, otherwise the midpoint of `[lo, hi]`.
    pub value: Rational,
    pub lo: Rational,
    pub hi: Rational,
    pub exact: bool,
    /// Bit lengths of `n_k` and `Q_{k-1}`; they give the coarse enclosure
    /// `(bits_n - 1) / bits_q < λ_k < bits_n / (bits_q - 1)`.
    pub bits_n: u64,
    pub bits_q: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLimitProfile {
    pub q: String,
    pub k_max: usize,
    /// Indexed from `k = 2`.
    pub terms: Vec<LogLimitTerm>,
    /// First `k` where a finite list ran out, if it did.
    pub exhausted_at: Option<usize>,
}

impl LogLimitProfile {
    pub fn term(&self, k: usize) -> Option<&LogLimitTerm> {
        k.checked_sub(2).and_then(|i| self.terms.get(i))
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# q={}\n# k_max={}\n", self.q, self.k_max);
        if let Some(k) = self.exhausted_at {
            out.push_str(&format!("# exhausted_at={k}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "lambda", "lambda_lo", "lambda_hi", "exact"]).expect("in-memory write");
        for t in &self.terms {
            w.write_record([
                t.k.to_string(),
                decimal(&t.value, 12),
                decimal(&t.lo, 12),
                decimal(&t.hi, 12),
                t.exact.to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }
}

/// `x` rounded toward zero to `places` decimals.
pub fn decimal(x: &Rational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (x.abs() * Rational::from_integer(scale.clone())).floor().to_integer();
    let (int, frac) = (&scaled / &scale, &scaled % &scale);
    let sign = if x.is_negative() && !scaled.is_zero() { "-" } else { "" };
    format!("{sign}{int}.{frac:0>places$}")
}

fn bits_of(f: &crate::numeric::Factored) -> u64 {
    f.floor_log2().try_into().unwrap_or(u64::MAX).saturating_add(1)
}

/// `λ_k` for `k = 2..=k_max`. Sequences whose terms are all powers of one
/// base give exact rationals; the rest get enclosures narrower than
/// `2^-PRECISION_BITS`.
pub fn loglimit_terms(q: &QSequence, k_max: usize) -> Result<LogLimitProfile, FaithfulnessError> {
    if k_max < 2 {
        return Err(FaithfulnessError::KMaxTooSmall(k_max));
    }
    let last = match q.len() {
        Some(len) if len < k_max => len,
        _ => k_max,
    };
    let exhausted_at = (last < k_max).then_some(last + 1);
    let exact = q.common_base().is_some();
    let mut terms = Vec::with_capacity(last.saturating_sub(1));
    let mut exp_sum = BigUint::zero();
    if exact && last >= 1 {
        exp_sum = q.term_exponent(1).expect("common base")?;
    }
    for k in 2..=last {
        let n = q.term_factored(k)?;
        let prefix = q.prefix_factored(k - 1)?;
        let (bits_n, bits_q) = (bits_of(&n), bits_of(&prefix));
        let term = if exact {
            let e = q.term_exponent(k).expect("common base")?;
            let v = rat_from_uint(e.clone(), exp_sum.clone());
            exp_sum += e;
            LogLimitTerm { k, value: v.clone(), lo: v.clone(), hi: v, exact: true, bits_n, bits_q }
        } else {
            let target = pow2(-PRECISION_BITS);
            let mut frac = 40;
            loop {
                let (n_lo, n_hi) = log2_bounds_factored(&n, frac);
                let (q_lo, q_hi) = log2_bounds_factored(&prefix, frac);
                let lo = &n_lo / &q_hi;
                let hi = &n_hi / &q_lo;
                if &hi - &lo < target {
                    let value = (&lo + &hi) / Rational::from_integer(2.into());
                    break LogLimitTerm { k, value, lo, hi, exact: false, bits_n, bits_q };
                }
                frac += 16;
            }
        };
        terms.push(term);
    }
    Ok(LogLimitProfile { q: q.to_string(), k_max, terms, exhausted_at })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Inclusive `k` range examined; `None` when there were no terms at all.
    pub window: Option<(usize, usize)>,
    pub tail_min: Option<Rational>,
    pub tail_max: Option<Rational>,
    pub zero_tol: Rational,
    pub away_tol: Rational,
    /// Sign changes of consecutive differences inside the window.
    pub direction_changes: usize,
    pub justification: String,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        match self.window {
            Some((a, b)) => writeln!(f, "window: k = {a}..={b}")?,
            None => writeln!(f, "window: empty")?,
        }
        if let (Some(lo), Some(hi)) = (&self.tail_min, &self.tail_max) {
            writeln!(f, "tail min: {}", decimal(lo, 12))?;
            writeln!(f, "tail max: {}", decimal(hi, 12))?;
        }
        writeln!(f, "zero_tol: {}  away_tol: {}", decimal(&self.zero_tol, 6), decimal(&self.away_tol, 6))?;
        writeln!(f, "direction changes: {}", self.direction_changes)?;
        writeln!(f, "justification: {}", self.justification)?;
        write!(f, "note: heuristic; finitely many terms cannot decide a limit")
    }
}

/// Minimum number of terms in the window, so each half has two.
pub const MIN_WINDOW_TERMS: usize = 4;

/// Grades the tail of a profile.
///
/// * converges to zero: every `λ_k` in the window is below `zero_tol` and
///   the maximum over the second half of the window is smaller than over
///   the first half;
/// * bounded away: every `λ_k` in the window exceeds `away_tol`;
/// * otherwise inconclusive, including windows with fewer than
///   [`MIN_WINDOW_TERMS`] terms.
///
/// The default window is the last half of the computed terms.
pub fn classify(
    p: &LogLimitProfile,
    window: Option<(usize, usize)>,
    zero_tol: &Rational,
    away_tol: &Rational,
) -> Result<Classification, FaithfulnessError> {
    if !zero_tol.is_positive() || !away_tol.is_positive() {
        return Err(FaithfulnessError::BadTolerance);
    }
    let max_k = p.terms.last().map_or(1, |t| t.k);
    let (lo, hi) = match window {
        Some((a, b)) => {
            if a < 2 || b < a || b > max_k {
                return Err(FaithfulnessError::BadWindow { lo: a, hi: b, max: max_k });
            }
            (a, b)
        }
        None if p.terms.is_empty() => {
            return Ok(Classification {
                verdict: Verdict::Inconclusive,
                window: None,
                tail_min: None,
                tail_max: None,
                zero_tol: zero_tol.clone(),
                away_tol: away_tol.clone(),
                direction_changes: 0,
                justification: match p.exhausted_at {
                    Some(k) => format!("sequence exhausted at k = {k}; no terms"),
                    None => "no terms".into(),
                },
            });
        }
        None => {
            let start = p.terms.len() / 2;
            (p.terms[start].k, max_k)
        }
    };
    let slice = &p.terms[lo - 2..=hi - 2];
    let tail_min = slice.iter().map(|t| t.lo.clone()).min().expect("nonempty");
    let tail_max = slice.iter().map(|t| t.hi.clone()).max().expect("nonempty");
    let direction_changes = slice
        .windows(3)
        .filter(|w| {
            let d1 = &w[1].value - &w[0].value;
            let d2 = &w[2].value - &w[1].value;
            d1.signum() * d2.signum() < Rational::zero()
        })
        .count();
    let mut c = Classification {
        verdict: Verdict::Inconclusive,
        window: Some((lo, hi)),
        tail_min: Some(tail_min.clone()),
        tail_max: Some(tail_max.clone()),
        zero_tol: zero_tol.clone(),
        away_tol: away_tol.clone(),
        direction_changes,
        justification: String::new(),
    };
    if slice.len() < MIN_WINDOW_TERMS {
        c.justification = format!("only {} terms in window (need {MIN_WINDOW_TERMS})", slice.len());
        if let Some(k) = p.exhausted_at {
            c.justification.push_str(&format!("; sequence exhausted at k = {k}"));
        }
        return Ok(c);
    }
    let mid = slice.len() / 2;
    let max_of = |s: &[LogLimitTerm]| s.iter().map(|t| t.hi.clone()).max().expect("nonempty");
    let (first, second) = (max_of(&slice[..mid]), max_of(&slice[mid..]));
    if &tail_max < zero_tol && second < first {
        c.verdict = Verdict::ConvergesToZero;
        c.justification = format!(
            "all terms below zero_tol; half maxima decrease {} -> {}",
            decimal(&first, 6),
            decimal(&second, 6)
        );
    } else if &tail_min > away_tol {
        c.verdict = Verdict::BoundedAway;
        c.justification = format!("all terms above away_tol (min {:.6})", to_f64(&tail_min));
    } else if &tail_max < zero_tol {
        c.justification = "all terms below zero_tol but the tail maximum did not decrease".into();
    } else {
        c.justification = "terms straddle the tolerances".into();
    }
    Ok(c)
}

/// Default terms examined for the built-in examples.
pub const EXAMPLE_KMAX: usize = 128;
/// `doublepow2` terms are huge; twenty already pin the limit near 1.
pub const DOUBLEPOW2_KMAX: usize = 20;

#[derive(Debug)]
pub struct BuiltinExample {
    pub q: QSequence,
    pub expected: Verdict,
    pub k_max: usize,
}

/// The worked sequences: constant bases and `2^k`, `k+1` satisfy the
/// condition; `2^(2^k)` does not.
pub fn builtin_examples() -> Vec<BuiltinExample> {
    let ex = |q: QSequence, expected, k_max| BuiltinExample { q, expected, k_max };
    vec![
        ex(QSequence::constant(2).expect("valid"), Verdict::ConvergesToZero, EXAMPLE_KMAX),
        ex(QSequence::constant(10).expect("valid"), Verdict::ConvergesToZero, EXAMPLE_KMAX),
        ex(QSequence::pow2(), Verdict::ConvergesToZero, EXAMPLE_KMAX),
        ex(QSequence::factorial(), Verdict::ConvergesToZero, EXAMPLE_KMAX),
        ex(QSequence::double_pow2(), Verdict::BoundedAway, DOUBLEPOW2_KMAX),
    ]
}

/// Default tolerances used by the CLI and the built-in examples.
pub fn default_tolerances() -> (Rational, Rational) {
    (crate::numeric::rat(1, 20), crate::numeric::rat(1, 2))
}

#[cfg(test)]
mod tests;
