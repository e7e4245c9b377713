//! Compression surrogates for prefix complexity and the dimension estimators
//! built on them.
//!
//! `liminf K(X|n)/n` is finitized as the minimum ratio over the last half of
//! the axis: points `n >= max_axis / 2`. The rule is stored in every profile.

mod oracle;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::covering::{CoveringError, CoveringFamily, CoveringSet, Family, Window};
use crate::numeric::{format_rational, pow2, to_f64, NumericError, QSequence, Rational};
use crate::sampling;

pub use oracle::{block_entropy_oracle, lz_oracle, parse_oracle, BlockEntropyOracle, ComplexityOracle, LzOracle};

pub const TRUNCATION_RULE: &str = "min ratio over axis points >= max_axis/2";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DimensionError {
    #[error("empty grid")]
    EmptyGrid,
    #[error("insufficient bits: {required} required, {available} available")]
    InsufficientBits { required: usize, available: usize },
    #[error("oracle {oracle} needs at least {min} bits, got {len}")]
    TooShort { oracle: String, len: usize, min: usize },
    #[error("unknown oracle `{0}` (expected `lz` or `entropy:<h>` with 1 <= h <= 16)")]
    InvalidOracle(String),
    #[error("s must lie in (0, 1], got {0}")]
    BadRate(String),
    #[error("k range must satisfy 1 <= k_lo <= k_hi")]
    BadRange,
    #[error("refill slope exceeds 1 at k = {0}")]
    InfeasibleSchedule(usize),
    #[error("no set containing the point has diameter below 2^-{r} within {max_level} levels")]
    DepthExhausted { r: i64, max_level: u32 },
    #[error("malformed profile: {0}")]
    Parse(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Covering(#[from] CoveringError),
}

/// Ratios `estimate(X|n) / n` along an axis of prefix lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionProfile {
    pub oracle: String,
    /// `None` for the plain grid, else the Q-spec whose scale points form the axis.
    pub scale: Option<String>,
    pub axis: Vec<usize>,
    pub estimates: Vec<u64>,
    pub ratios: Vec<Rational>,
    /// `tail_inf[i] = min(ratios[i..])`.
    pub tail_inf: Vec<Rational>,
    /// Axis points dropped because the oracle rejects inputs that short.
    pub skipped: usize,
    pub seed: Option<u64>,
}

impl DimensionProfile {
    fn build(oracle: &dyn ComplexityOracle, x: &[bool], axis: Vec<usize>, scale: Option<String>) -> Result<Self, DimensionError> {
        let before = axis.len();
        let axis: Vec<usize> = axis.into_iter().filter(|&n| n >= oracle.min_length().max(1)).collect();
        if axis.is_empty() {
            return Err(DimensionError::EmptyGrid);
        }
        let estimates = oracle.prefix_estimates(x, &axis)?;
        let ratios: Vec<Rational> = axis
            .iter()
            .zip(&estimates)
            .map(|(&n, &e)| Rational::new(BigInt::from(e), BigInt::from(n)))
            .collect();
        let mut tail_inf = ratios.clone();
        for i in (0..tail_inf.len().saturating_sub(1)).rev() {
            if tail_inf[i + 1] < tail_inf[i] {
                tail_inf[i] = tail_inf[i + 1].clone();
            }
        }
        Ok(DimensionProfile {
            oracle: oracle.label(),
            scale,
            skipped: before - axis.len(),
            axis,
            estimates,
            ratios,
            tail_inf,
            seed: None,
        })
    }

    /// Index of the first axis point in the last half.
    pub fn headline_index(&self) -> usize {
        let max = *self.axis.last().expect("nonempty axis");
        self.axis.iter().position(|&n| 2 * n >= max).expect("max is in the last half")
    }

    /// Minimum ratio over axis points `n >= max_axis / 2`.
    pub fn headline(&self) -> Rational {
        self.tail_inf[self.headline_index()].clone()
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# oracle={}\n# truncation={}\n", self.oracle, TRUNCATION_RULE);
        if let Some(s) = &self.scale {
            out.push_str(&format!("# scale=cantor:{s}\n"));
        }
        if let Some(seed) = self.seed {
            out.push_str(&format!("# seed={seed}\n"));
        }
        out.push_str(&format!("# headline={}\n", format_rational(&self.headline())));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis_point", "estimate_bits", "ratio_num", "ratio_den", "tail_inf_num", "tail_inf_den"])
            .expect("in-memory write");
        for i in 0..self.axis.len() {
            w.write_record([
                self.axis[i].to_string(),
                self.estimates[i].to_string(),
                self.ratios[i].numer().to_string(),
                self.ratios[i].denom().to_string(),
                self.tail_inf[i].numer().to_string(),
                self.tail_inf[i].denom().to_string(),
            ])
            .expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8"));
        out
    }
}

impl fmt::Display for DimensionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.headline();
        let what = match &self.scale {
            Some(q) => format!("cdim_phi[cantor:{q}]"),
            None => "cdim".to_string(),
        };
        write!(
            f,
            "{what} headline {} ({:.4}) oracle {} over {} points, {}",
            format_rational(&h),
            to_f64(&h),
            self.oracle,
            self.axis.len(),
            TRUNCATION_RULE
        )
    }
}

/// Profile over an explicit grid of prefix lengths.
pub fn cdim_estimate(x: &[bool], oracle: &dyn ComplexityOracle, grid: &[usize]) -> Result<DimensionProfile, DimensionError> {
    let mut axis = grid.to_vec();
    axis.sort_unstable();
    axis.dedup();
    match axis.last() {
        None => return Err(DimensionError::EmptyGrid),
        Some(&n) if n > x.len() => return Err(DimensionError::InsufficientBits { required: n, available: x.len() }),
        _ => {}
    }
    DimensionProfile::build(oracle, x, axis, None)
}

/// `1..=n`.
pub fn plain_grid(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Scale points `m_k = floor(log2 Q_k)` for `k = 1..=k_max`.
pub fn scale_points(q: &QSequence, k_max: usize) -> Result<Vec<usize>, DimensionError> {
    (1..=k_max).map(|k| Ok(q.scale_index_usize(k)?)).collect()
}

/// Largest `k` with `m_k <= len` (0 if none).
pub fn default_phi_kmax(q: &QSequence, len: usize) -> usize {
    let mut k = 0;
    while q.is_defined(k + 1) && q.scale_index_usize(k + 1).is_ok_and(|m| m <= len) {
        k += 1;
    }
    k
}

/// Profile sampled only at the scale points of `q`.
pub fn cdim_phi_estimate(
    x: &[bool],
    q: &QSequence,
    oracle: &dyn ComplexityOracle,
    k_max: usize,
) -> Result<DimensionProfile, DimensionError> {
    if k_max == 0 {
        return Err(DimensionError::EmptyGrid);
    }
    let axis = scale_points(q, k_max)?;
    let need = *axis.last().expect("k_max >= 1");
    if need > x.len() {
        return Err(DimensionError::InsufficientBits { required: need, available: x.len() });
    }
    DimensionProfile::build(oracle, x, axis, Some(q.to_string()))
}

/// One block of the dilution schedule: positions `(start, end]` hold
/// `zeros` zeros followed by `random` seeded bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DilutionBlock {
    pub k: usize,
    pub start: usize,
    pub end: usize,
    pub zeros: usize,
    pub random: usize,
}

#[derive(Debug, Clone)]
pub struct DilutionWitness {
    pub bits: Vec<bool>,
    pub s: Rational,
    pub seed: u64,
    pub blocks: Vec<DilutionBlock>,
    /// Random-bit density at the end of each zero run: `R_k / (m_k + zeros)`.
    pub valleys: Vec<(usize, Rational)>,
}

impl DilutionWitness {
    /// The smallest predicted valley density among valleys at positions
    /// `>= len / 2`, or `None` when no valley falls there.
    pub fn predicted_tail_valley(&self) -> Option<Rational> {
        let half = self.bits.len().div_ceil(2);
        self.valleys.iter().filter(|(p, _)| *p >= half).map(|(_, r)| r.clone()).min()
    }
}

/// A sequence with `floor(s * m_k)` seeded random bits among its first `m_k`
/// for every `k` in `k_lo..=k_hi`, with the zeros of each block placed first
/// so the density dips between scale points. Length `m_{k_hi}`.
pub fn dilution_witness(
    q: &QSequence,
    s: &Rational,
    k_lo: usize,
    k_hi: usize,
    seed: u64,
) -> Result<DilutionWitness, DimensionError> {
    if s <= &Rational::zero() || s > &Rational::one() {
        return Err(DimensionError::BadRate(format_rational(s)));
    }
    if k_lo == 0 || k_hi < k_lo {
        return Err(DimensionError::BadRange);
    }
    let target = |m: usize| -> usize {
        (s * Rational::from_integer(BigInt::from(m))).floor().to_integer().try_into().expect("fits")
    };
    let mut rng = sampling::rng(seed);
    let mut bits = Vec::new();
    let mut blocks = Vec::new();
    let mut valleys = Vec::new();

    // up to m_{k_lo}: random first, then zeros
    let m0 = q.scale_index_usize(k_lo)?;
    let r0 = target(m0);
    bits.extend(sampling::fill_bits(&mut rng, r0));
    bits.resize(m0, false);
    blocks.push(DilutionBlock { k: k_lo, start: 0, end: m0, zeros: m0 - r0, random: r0 });

    let mut prev_m = m0;
    let mut prev_r = r0;
    for k in k_lo + 1..=k_hi {
        let m = q.scale_index_usize(k)?;
        let r = target(m);
        let len = m - prev_m;
        let random = r - prev_r;
        if random > len {
            return Err(DimensionError::InfeasibleSchedule(k));
        }
        let zeros = len - random;
        bits.resize(prev_m + zeros, false);
        bits.extend(sampling::fill_bits(&mut rng, random));
        if zeros > 0 {
            valleys.push((prev_m + zeros, Rational::new(BigInt::from(prev_r), BigInt::from(prev_m + zeros))));
        }
        blocks.push(DilutionBlock { k, start: prev_m, end: m, zeros, random });
        prev_m = m;
        prev_r = r;
    }
    debug_assert_eq!(bits.len(), prev_m);
    Ok(DilutionWitness { bits, s: s.clone(), seed, blocks, valleys })
}

/// Self-delimiting code for a nonnegative integer: Elias gamma of
/// `bitlen(n) + 1`, then the bits of `n`.
pub fn encode_natural(n: &BigUint, out: &mut Vec<bool>) {
    let len = n.bits();
    let head = BigUint::from(len + 1);
    let hb = head.bits();
    out.extend(std::iter::repeat_n(false, (hb - 1) as usize));
    out.extend((0..hb).rev().map(|i| head.bit(i)));
    out.extend((0..len).rev().map(|i| n.bit(i)));
}

/// Numerator then denominator of a nonnegative rational, each self-delimiting.
pub fn encode_rational(q: &Rational) -> Vec<bool> {
    let mut out = Vec::new();
    encode_natural(&q.numer().to_biguint().expect("nonnegative"), &mut out);
    encode_natural(&q.denom().to_biguint().expect("positive"), &mut out);
    out
}

/// Inverse of [`encode_rational`]; returns the value and the bits consumed.
pub fn decode_rational(bits: &[bool]) -> Option<(Rational, usize)> {
    fn natural(bits: &[bool], pos: &mut usize) -> Option<BigUint> {
        let mut zeros = 0;
        while !*bits.get(*pos)? {
            zeros += 1;
            *pos += 1;
        }
        let mut head = 0u64;
        for _ in 0..=zeros {
            head = (head << 1) | u64::from(*bits.get(*pos)?);
            *pos += 1;
        }
        let mut n = BigUint::zero();
        for _ in 0..head - 1 {
            n = (n << 1u8) | BigUint::from(u8::from(*bits.get(*pos)?));
            *pos += 1;
        }
        Some(n)
    }
    let mut pos = 0;
    let a = natural(bits, &mut pos)?;
    let b = natural(bits, &mut pos)?;
    if b.is_zero() {
        return None;
    }
    Some((Rational::new(a.into(), b.into()), pos))
}

/// Search limits for [`kr_point`].
#[derive(Debug, Clone, Copy)]
pub struct KrBounds {
    pub max_denominator: u64,
    pub max_level: u32,
}

#[derive(Debug, Clone)]
pub struct KrResult {
    pub value: u64,
    pub witness: CoveringSet,
    pub witness_rational: Rational,
    pub candidates: usize,
}

/// `min K(q)` over rationals `q` (denominator within bounds) lying in a family
/// set that contains `x` and has diameter `< 2^{-r}`, with `K` replaced by the
/// oracle applied to [`encode_rational`]. Ties go to the smaller denominator,
/// then the smaller numerator.
pub fn kr_point(
    x: &Rational,
    family: &CoveringFamily,
    r: i64,
    oracle: &dyn ComplexityOracle,
    bounds: KrBounds,
) -> Result<KrResult, DimensionError> {
    let limit = pow2(-r);
    let mut maximal: Vec<CoveringSet> = Vec::new();
    for level in 0..=bounds.max_level {
        let sets = match family.sets_containing(x, level, &Window::all()) {
            Ok(s) => s,
            Err(CoveringError::Numeric(_)) => break, // finite Q exhausted
            Err(e) => return Err(e.into()),
        };
        for u in sets {
            if u.diameter() < limit && !maximal.iter().any(|m| m.contains(&u)) {
                maximal.push(u);
            }
        }
    }
    if maximal.is_empty() {
        return Err(DimensionError::DepthExhausted { r, max_level: bounds.max_level });
    }
    let mut best: Option<(u64, u64, BigInt, CoveringSet)> = None;
    let mut candidates = 0;
    for u in &maximal {
        for den in 1..=bounds.max_denominator {
            let d = BigInt::from(den);
            let lo = (u.lo() * Rational::from_integer(d.clone())).ceil().to_integer();
            let hi = (u.hi() * Rational::from_integer(d.clone())).floor().to_integer();
            let mut p = lo;
            while p <= hi {
                if p.gcd(&d).is_one() {
                    candidates += 1;
                    let q = Rational::new(p.clone(), d.clone());
                    let cost = oracle.estimate(&encode_rational(&q)).unwrap_or(u64::MAX);
                    let better = match &best {
                        None => true,
                        Some((c, bd, bp, _)) => (cost, den, &p) < (*c, *bd, bp),
                    };
                    if better {
                        best = Some((cost, den, p.clone(), u.clone()));
                    }
                }
                p += 1;
            }
        }
    }
    let (value, den, p, witness) = best.ok_or(DimensionError::DepthExhausted { r, max_level: bounds.max_level })?;
    Ok(KrResult { value, witness, witness_rational: Rational::new(p, BigInt::from(den)), candidates })
}
