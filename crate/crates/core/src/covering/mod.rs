//! Leveled families of covering sets over `[0, 1]`.
//!
//! A family assigns to each level `n >= 0` a collection of closed rational
//! intervals. Level 0 is always `{[0, 1]}`. Every level-`(n+1)` set has exactly
//! one level-`n` superset, sets within a level are pairwise incomparable, and
//! sets shrink around every point. The three built-in families are dyadic
//! intervals, Cantor-series cells for a [`QSequence`], and continued-fraction
//! cylinders.

mod builtin;
mod verify;

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::numeric::{format_rational, NumericError, Rational};

pub use builtin::{CoveringFamily, FamilyKind};
pub use verify::{standard_samples, verify_family_axioms, Axiom, AxiomEntry, AxiomReport, Verdict, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoveringError {
    #[error("continued-fraction levels are infinite; a window with a maximum partial quotient is required")]
    MissingWindow,
    #[error("level {level} has {count} sets, more than the enumeration limit; pass a window")]
    TooMany { level: u32, count: String },
    #[error("level-0 sets have no parent")]
    NoParent,
    #[error("point {0} lies outside [0, 1]")]
    PointOutOfRange(String),
    #[error("set {set} does not belong to family {family}")]
    ForeignSet { set: String, family: String },
    #[error("no level-{level} set containing {point} refines the chain")]
    Exhausted { level: u32, point: String },
    #[error("no set with index {index} at level {level}")]
    InvalidIndex { level: u32, index: String },
    #[error("malformed family spec `{0}`")]
    InvalidFamilySpec(String),
    #[error("negative level {0}")]
    NegativeLevel(i64),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Which set to pick when a point is a shared endpoint of two sets at a level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// The set lying to the left of the point (the point is its right endpoint).
    #[default]
    Left,
    /// The set lying to the right of the point.
    Right,
}

/// Restricts enumeration of a level.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Window {
    /// Largest partial quotient enumerated for continued-fraction levels.
    pub max_term: Option<u64>,
    /// Half-open index range `[lo, hi)` for grid levels.
    pub index_range: Option<(BigUint, BigUint)>,
}

impl Window {
    pub fn all() -> Self {
        Window::default()
    }

    pub fn max_term(t: u64) -> Self {
        Window { max_term: Some(t), index_range: None }
    }

    pub fn indices(lo: u64, hi: u64) -> Self {
        Window { max_term: None, index_range: Some((lo.into(), hi.into())) }
    }
}

/// One covering set `U_i^n`: a closed interval `[lo, hi]` identified by
/// `(family, level, index)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoveringSet {
    family: Arc<str>,
    level: u32,
    index: BigUint,
    lo: Rational,
    hi: Rational,
}

impl CoveringSet {
    pub fn new(family: Arc<str>, level: u32, index: BigUint, lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi && !lo.is_negative() && hi <= Rational::one());
        CoveringSet { family, level, index, lo, hi }
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &BigUint {
        &self.index
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    /// `hi - lo`, exact.
    pub fn diameter(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Closed-interval membership.
    pub fn contains_point(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// Set containment of the underlying intervals.
    pub fn contains(&self, other: &CoveringSet) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn comparable(&self, other: &CoveringSet) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn key(&self) -> (u32, BigUint) {
        (self.level, self.index.clone())
    }
}

impl fmt::Display for CoveringSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}#{}:{}[{}, {}]",
            self.family,
            self.level,
            self.index,
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

/// The operations every covering family provides. The built-ins implement it
/// via [`CoveringFamily`]; tests plug in doubles to exercise the verifier.
pub trait Family: Send + Sync {
    fn id(&self) -> &str;

    /// The bound `c` on incomparable sets sharing a point.
    fn intersection_constant(&self) -> usize;

    /// Whether the children of a set tile it exactly (grid families).
    fn children_partition_parent(&self) -> bool;

    /// Deepest defined level, if the family is finite.
    fn max_level(&self) -> Option<u32> {
        None
    }

    fn level_sets(&self, level: u32, window: &Window) -> Result<Vec<CoveringSet>, CoveringError>;

    fn children(&self, set: &CoveringSet, window: &Window) -> Result<Vec<CoveringSet>, CoveringError>;

    fn parent(&self, set: &CoveringSet) -> Result<CoveringSet, CoveringError>;

    fn sets_containing(&self, q: &Rational, level: u32, window: &Window) -> Result<Vec<CoveringSet>, CoveringError>;
}

/// A nested chain of sets, one per level, all containing `point`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiRepresentation {
    pub point: Rational,
    pub chain: Vec<CoveringSet>,
}

impl PhiRepresentation {
    pub fn depth(&self) -> u32 {
        self.chain.len() as u32 - 1
    }
}

pub fn diameter(set: &CoveringSet) -> Rational {
    set.diameter()
}

pub fn contains_point(set: &CoveringSet, q: &Rational) -> bool {
    set.contains_point(q)
}

pub(crate) fn check_unit(q: &Rational) -> Result<(), CoveringError> {
    if q.is_negative() || q > &Rational::one() {
        Err(CoveringError::PointOutOfRange(format_rational(q)))
    } else {
        Ok(())
    }
}

/// Builds a nested chain through levels `0..=depth` containing `q`; shared
/// endpoints are resolved by `tie` at every level.
pub fn phi_representation(
    family: &dyn Family,
    q: &Rational,
    depth: u32,
    tie: TieRule,
) -> Result<PhiRepresentation, CoveringError> {
    check_unit(q)?;
    let root = family.level_sets(0, &Window::all())?.into_iter().next().expect("level 0 is nonempty");
    let mut chain = vec![root];
    for level in 1..=depth {
        let prev = chain.last().expect("nonempty");
        let mut cands: Vec<CoveringSet> = family
            .sets_containing(q, level, &Window::all())?
            .into_iter()
            .filter(|s| prev.contains(s))
            .collect();
        cands.sort_by(|a, b| a.lo.cmp(&b.lo));
        let pick = match tie {
            TieRule::Left => cands.into_iter().next(),
            TieRule::Right => cands.into_iter().next_back(),
        };
        match pick {
            Some(s) => chain.push(s),
            None => return Err(CoveringError::Exhausted { level, point: format_rational(q) }),
        }
    }
    Ok(PhiRepresentation { point: q.clone(), chain })
}

/// Largest pairwise-incomparable subfamily of intervals that all contain one
/// common point. Sorted by left endpoint, such a subfamily must have strictly
/// increasing left and right endpoints, so this is a longest-chain DP.
pub fn max_incomparable_through_point(sets: &[CoveringSet]) -> usize {
    let mut v: Vec<&CoveringSet> = sets.iter().collect();
    v.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
    v.dedup_by(|a, b| a.lo == b.lo && a.hi == b.hi);
    let mut best = vec![1usize; v.len()];
    for j in 0..v.len() {
        for i in 0..j {
            if v[i].lo < v[j].lo && v[i].hi < v[j].hi {
                best[j] = best[j].max(best[i] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}
