//! Finite-depth supergales over a covering family.
//!
//! A supergale assigns capital `d(U) >= 0` to covering sets and must satisfy
//! `d(U)|U|^s >= sum over children V of d(V)|V|^s`. Values and masses are
//! [`Surd`]s, so every inequality is decided exactly even when `s` is not an
//! integer.

mod io;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::covering::{phi_representation, CoveringError, CoveringFamily, CoveringSet, Family, TieRule, Window};
use crate::numeric::{format_rational, pow2, Exponent, Rational, Surd, SurdError};

pub use io::{read_gale_csv, write_gale_csv};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GaleError {
    #[error("gales belong to different families ({0} vs {1})")]
    FamilyMismatch(String, String),
    #[error("gales have different exponents ({0} vs {1})")]
    ExponentMismatch(String, String),
    #[error("gales have different depths ({0} vs {1})")]
    DepthMismatch(u32, u32),
    #[error("weights must be positive and match the number of gales")]
    BadWeights,
    #[error("antichain contains comparable sets {0} and {1}")]
    Comparable(String, String),
    #[error("set {0} lies below the gale depth {1}")]
    OutsideDepth(String, u32),
    #[error("set {0} has zero diameter")]
    ZeroDiameter(String),
    #[error("the new exponent {new} is smaller than {old}")]
    ExponentDecrease { old: String, new: String },
    #[error("negative capital {value} at {set}")]
    NegativeValue { set: String, value: String },
    #[error("malformed gale file: {0}")]
    Parse(String),
    #[error(transparent)]
    Covering(#[from] CoveringError),
    #[error(transparent)]
    Surd(#[from] SurdError),
}

type Key = (u32, BigUint);

/// A finite table of capital values on levels `0..=depth`; missing sets hold 0.
#[derive(Debug, Clone)]
pub struct Supergale {
    family: Arc<CoveringFamily>,
    s: Exponent,
    depth: u32,
    window: Window,
    values: BTreeMap<Key, Surd>,
}

impl Supergale {
    pub fn new(family: Arc<CoveringFamily>, s: Exponent, depth: u32) -> Self {
        Supergale { family, s, depth, window: Window::all(), values: BTreeMap::new() }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    /// `d(U) = value` on every set of levels `0..=depth` in the window.
    pub fn constant(
        family: Arc<CoveringFamily>,
        s: Exponent,
        depth: u32,
        window: Window,
        value: &Rational,
    ) -> Result<Self, GaleError> {
        let mut g = Supergale::new(family, s, depth).with_window(window);
        for level in 0..=depth {
            for u in g.family.level_sets(level, &g.window)? {
                g.set(&u, Surd::from_rational(s.den(), value.clone()))?;
            }
        }
        Ok(g)
    }

    pub fn family(&self) -> &Arc<CoveringFamily> {
        &self.family
    }

    pub fn s(&self) -> Exponent {
        self.s
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn set(&mut self, u: &CoveringSet, value: Surd) -> Result<(), GaleError> {
        if u.family() != self.family.id() {
            return Err(CoveringError::ForeignSet { set: u.to_string(), family: self.family.id().to_string() }.into());
        }
        if u.level() > self.depth {
            return Err(GaleError::OutsideDepth(u.to_string(), self.depth));
        }
        if value.signum()? == Ordering::Less {
            return Err(GaleError::NegativeValue { set: u.to_string(), value: value.to_string() });
        }
        if value.is_zero() {
            self.values.remove(&u.key());
        } else {
            self.values.insert(u.key(), value);
        }
        Ok(())
    }

    pub fn set_rational(&mut self, u: &CoveringSet, value: Rational) -> Result<(), GaleError> {
        self.set(u, Surd::from_rational(self.s.den(), value))
    }

    pub fn value(&self, u: &CoveringSet) -> Surd {
        self.values.get(&u.key()).cloned().unwrap_or_else(|| Surd::zero(self.s.den()))
    }

    /// Sets with nonzero capital, in level-then-index order.
    pub fn support(&self) -> Result<Vec<(CoveringSet, &Surd)>, GaleError> {
        self.values
            .iter()
            .map(|((level, index), v)| Ok((self.family.set_at(*level, index)?, v)))
            .collect()
    }

    /// `d(U)|U|^s`.
    pub fn mass(&self, u: &CoveringSet) -> Surd {
        let v = self.value(u);
        if v.is_zero() {
            return v;
        }
        &v * &Surd::power(&u.diameter(), self.s)
    }

    /// Total mass on level 0.
    pub fn root_mass(&self) -> Result<Surd, GaleError> {
        let mut total = Surd::zero(self.s.den());
        for u in self.family.level_sets(0, &self.window)? {
            total = total + self.mass(&u);
        }
        Ok(total)
    }
}

/// One node where the supergale inequality was tested.
#[derive(Debug, Clone)]
pub struct NodeCheck {
    pub set: CoveringSet,
    pub lhs: Surd,
    pub rhs: Surd,
    pub outcome: Result<Ordering, SurdError>,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checked: usize,
    pub equalities: usize,
    pub violations: Vec<NodeCheck>,
    pub undecided: Vec<NodeCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.undecided.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "checked {} nodes: {} equalities, {} violations, {} undecided",
            self.checked,
            self.equalities,
            self.violations.len(),
            self.undecided.len()
        )?;
        for v in &self.violations {
            writeln!(f, "violation at {}: {} < {}", v.set, v.lhs, v.rhs)?;
        }
        for v in &self.undecided {
            writeln!(f, "undecided at {}: {} vs {}", v.set, v.lhs, v.rhs)?;
        }
        Ok(())
    }
}

/// Tests `d(U)|U|^s >= sum d(V)|V|^s` at every node of levels `0..depth`
/// that carries capital or has a child carrying capital; elsewhere both sides
/// are 0.
pub fn validate_supergale(d: &Supergale) -> Result<ValidationReport, GaleError> {
    let mut kids: BTreeMap<Key, Vec<CoveringSet>> = BTreeMap::new();
    let mut nodes: BTreeSet<Key> = BTreeSet::new();
    for (u, _) in d.support()? {
        if u.level() < d.depth {
            nodes.insert(u.key());
        }
        if u.level() > 0 {
            let p = d.family.parent(&u)?;
            nodes.insert(p.key());
            kids.entry(p.key()).or_default().push(u);
        }
    }
    let mut report = ValidationReport::default();
    for key in nodes {
        let u = d.family.set_at(key.0, &key.1)?;
        let lhs = d.mass(&u);
        let rhs = kids.get(&key).map_or(Surd::zero(d.s.den()), |vs| {
            vs.iter().fold(Surd::zero(d.s.den()), |acc, v| acc + d.mass(v))
        });
        let outcome = (lhs.clone() - rhs.clone()).signum();
        report.checked += 1;
        let check = NodeCheck { set: u, lhs, rhs, outcome: outcome.clone() };
        match outcome {
            Ok(Ordering::Equal) => report.equalities += 1,
            Ok(Ordering::Greater) => {}
            Ok(Ordering::Less) => report.violations.push(check),
            Err(_) => report.undecided.push(check),
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct KraftResult {
    /// `sum over E of d(V)|V|^s`
    pub antichain_mass: Surd,
    pub root_mass: Surd,
    pub holds: bool,
}

/// Checks `sum_{V in E} d(V)|V|^s <= sum_{U in level 0} d(U)|U|^s`.
pub fn kraft_check(d: &Supergale, antichain: &[CoveringSet]) -> Result<KraftResult, GaleError> {
    for (i, a) in antichain.iter().enumerate() {
        if a.level() > d.depth {
            return Err(GaleError::OutsideDepth(a.to_string(), d.depth));
        }
        for b in &antichain[i + 1..] {
            if a.comparable(b) {
                return Err(GaleError::Comparable(a.to_string(), b.to_string()));
            }
        }
    }
    let antichain_mass = antichain.iter().fold(Surd::zero(d.s.den()), |acc, v| acc + d.mass(v));
    let root_mass = d.root_mass()?;
    let holds = (root_mass.clone() - antichain_mass.clone()).signum()? != Ordering::Less;
    Ok(KraftResult { antichain_mass, root_mass, holds })
}

/// `d(U) = |U|^{-s} sum_{V in C, V ⊆ U} |V|^s` for every ancestor `U` of a
/// cover element (all other sets get 0).
pub fn cover_to_gale(
    cover: &[CoveringSet],
    s: Exponent,
    family: Arc<CoveringFamily>,
    depth: u32,
) -> Result<Supergale, GaleError> {
    let mut sums: BTreeMap<Key, (CoveringSet, Surd)> = BTreeMap::new();
    let distinct: BTreeSet<&CoveringSet> = cover.iter().collect();
    for v in distinct {
        if v.family() != family.id() {
            return Err(CoveringError::ForeignSet { set: v.to_string(), family: family.id().to_string() }.into());
        }
        if v.level() > depth {
            return Err(GaleError::OutsideDepth(v.to_string(), depth));
        }
        if v.diameter().is_zero() {
            return Err(GaleError::ZeroDiameter(v.to_string()));
        }
        let w = Surd::power(&v.diameter(), s);
        let mut a = v.clone();
        loop {
            let entry = sums.entry(a.key()).or_insert_with(|| (a.clone(), Surd::zero(s.den())));
            entry.1 = entry.1.clone() + w.clone();
            if a.level() == 0 {
                break;
            }
            a = family.parent(&a)?;
        }
    }
    let mut g = Supergale::new(family, s, depth);
    for (_, (u, total)) in sums {
        let inv = Surd::power(&u.diameter().recip(), s);
        g.set(&u, &total * &inv)?;
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct GaleCover {
    pub antichain: Vec<CoveringSet>,
    pub threshold: Surd,
    pub root_mass: Surd,
    /// Root mass below `2^r`, which forces every selected set below `delta`.
    pub bound_forced: bool,
    /// Selected sets whose diameter is not below `delta`.
    pub wide_sets: Vec<CoveringSet>,
}

/// Sets with `d(U) >= 2^r / delta^s`, pruned to an antichain by first-seen
/// maximality in level-then-index order.
pub fn gale_to_cover(d: &Supergale, r: i64, delta: &Rational) -> Result<GaleCover, GaleError> {
    let threshold = Surd::power(&delta.recip(), d.s).scale(&pow2(r));
    let mut kept: Vec<CoveringSet> = Vec::new();
    for (u, v) in d.support()? {
        if (v.clone() - threshold.clone()).signum()? == Ordering::Less {
            continue;
        }
        if kept.iter().any(|k| k.comparable(&u)) {
            continue;
        }
        kept.push(u);
    }
    let root_mass = d.root_mass()?;
    let bound_forced = (Surd::from_rational(1, pow2(r)) - root_mass.clone()).signum()? == Ordering::Greater;
    let wide_sets = kept.iter().filter(|u| &u.diameter() >= delta).cloned().collect();
    Ok(GaleCover { antichain: kept, threshold, root_mass, bound_forced, wide_sets })
}

/// Pointwise `sum_i w_i d_i`.
pub fn combine_gales(gales: &[Supergale], weights: &[Rational]) -> Result<Supergale, GaleError> {
    let first = gales.first().ok_or(GaleError::BadWeights)?;
    if gales.len() != weights.len() || weights.iter().any(|w| !w.is_positive()) {
        return Err(GaleError::BadWeights);
    }
    let mut out = Supergale::new(Arc::clone(&first.family), first.s, first.depth).with_window(first.window.clone());
    for (g, w) in gales.iter().zip(weights) {
        if g.family.id() != first.family.id() {
            return Err(GaleError::FamilyMismatch(g.family.id().to_string(), first.family.id().to_string()));
        }
        if g.s != first.s {
            return Err(GaleError::ExponentMismatch(g.s.to_string(), first.s.to_string()));
        }
        if g.depth != first.depth {
            return Err(GaleError::DepthMismatch(g.depth, first.depth));
        }
        for (k, v) in &g.values {
            let cur = out.values.remove(k).unwrap_or_else(|| Surd::zero(first.s.den()));
            let next = cur + v.scale(w);
            if !next.is_zero() {
                out.values.insert(k.clone(), next);
            }
        }
    }
    Ok(out)
}

/// `d'(U) = d(U)|U|^{s - s'}`, a supergale for the larger exponent `s'`.
pub fn reweight(d: &Supergale, s_new: Exponent) -> Result<Supergale, GaleError> {
    let diff = s_new.as_rational() - d.s.as_rational();
    if diff.is_negative() {
        return Err(GaleError::ExponentDecrease { old: d.s.to_string(), new: s_new.to_string() });
    }
    let e = Exponent::from_rational(&diff)?;
    let mut out = Supergale::new(Arc::clone(&d.family), s_new, d.depth).with_window(d.window.clone());
    for (u, v) in d.support()? {
        let scaled = v * &Surd::power(&u.diameter().recip(), e);
        out.values.insert(u.key(), scaled);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SuccessProfile {
    pub point: Rational,
    /// Capital along the representation chain, one entry per level reached.
    pub values: Vec<(u32, Surd)>,
    pub max: Surd,
    /// `(k, first level with d >= 2^k)` for `k = 0..=floor(log2 max)`.
    pub thresholds: Vec<(i64, Option<u32>)>,
    /// Set when the chain stopped before the gale depth (finite expansions).
    pub truncated_at: Option<u32>,
}

impl fmt::Display for SuccessProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x = {}", format_rational(&self.point))?;
        for (level, v) in &self.values {
            writeln!(f, "level {level}: {v}")?;
        }
        writeln!(f, "max {}", self.max)?;
        for (k, level) in &self.thresholds {
            match level {
                Some(l) => writeln!(f, "reaches 2^{k} at level {l}")?,
                None => writeln!(f, "never reaches 2^{k}")?,
            }
        }
        if let Some(l) = self.truncated_at {
            writeln!(f, "chain ends at level {l}")?;
        }
        Ok(())
    }
}

/// Capital along the representation chain of `x` through the gale depth.
pub fn success_profile(d: &Supergale, x: &Rational, tie: TieRule) -> Result<SuccessProfile, GaleError> {
    let mut depth = d.depth;
    let mut truncated_at = None;
    let chain = loop {
        match phi_representation(d.family.as_ref(), x, depth, tie) {
            Ok(rep) => break rep.chain,
            Err(CoveringError::Exhausted { level, .. }) if level > 0 => {
                depth = level - 1;
                truncated_at = Some(depth);
            }
            Err(e) => return Err(e.into()),
        }
    };
    let values: Vec<(u32, Surd)> = chain.iter().map(|u| (u.level(), d.value(u))).collect();
    let mut max = Surd::zero(d.s.den());
    for (_, v) in &values {
        if v.try_cmp(&max)? == Ordering::Greater {
            max = v.clone();
        }
    }
    let mut thresholds = Vec::new();
    if !max.is_zero() {
        let top = max.floor_log2()?;
        for k in 0..=top.max(-1) {
            let bar = Surd::from_rational(1, pow2(k));
            let mut first = None;
            for (level, v) in &values {
                if v.try_cmp(&bar)? != Ordering::Less {
                    first = Some(*level);
                    break;
                }
            }
            thresholds.push((k, first));
        }
    }
    Ok(SuccessProfile { point: x.clone(), values, max, thresholds, truncated_at })
}
