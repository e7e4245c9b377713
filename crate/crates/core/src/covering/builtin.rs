use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

use super::{check_unit, CoveringError, CoveringSet, Family, Window};
use crate::numeric::{format_rational, QSequence, Rational};
use crate::representation::{cf_cylinder, cf_forms, CfWord};

/// Most sets a single enumeration may return without an explicit window.
pub const ENUMERATION_LIMIT: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    Dyadic,
    Cantor(Arc<QSequence>),
    ContinuedFraction,
}

/// One of the three built-in families. Dyadic and Cantor families are grids:
/// level `k` consists of `[m/Q_k, (m+1)/Q_k]` for `0 <= m < Q_k`.
#[derive(Debug, Clone)]
pub struct CoveringFamily {
    kind: FamilyKind,
    id: Arc<str>,
    grid: Option<Arc<QSequence>>,
}

impl CoveringFamily {
    pub fn dyadic() -> Self {
        CoveringFamily {
            kind: FamilyKind::Dyadic,
            id: Arc::from("dyadic"),
            grid: Some(Arc::new(QSequence::constant(2).expect("2 is a valid base"))),
        }
    }

    pub fn cantor(q: QSequence) -> Self {
        let q = Arc::new(q);
        CoveringFamily {
            id: Arc::from(format!("cantor:{q}")),
            kind: FamilyKind::Cantor(Arc::clone(&q)),
            grid: Some(q),
        }
    }

    pub fn continued_fraction() -> Self {
        CoveringFamily { kind: FamilyKind::ContinuedFraction, id: Arc::from(crate::representation::CF_FAMILY_ID), grid: None }
    }

    /// `dyadic`, `cantor:<Q-spec>` or `cf`.
    pub fn parse(spec: &str) -> Result<Self, CoveringError> {
        let s = spec.trim();
        match s {
            "dyadic" => Ok(Self::dyadic()),
            "cf" | "continued_fraction" => Ok(Self::continued_fraction()),
            _ => match s.strip_prefix("cantor:") {
                Some(q) => Ok(Self::cantor(QSequence::parse(q)?)),
                None => Err(CoveringError::InvalidFamilySpec(spec.to_string())),
            },
        }
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    /// The Q-sequence of a grid family (`const:2` for dyadic).
    pub fn grid(&self) -> Option<&Arc<QSequence>> {
        self.grid.as_ref()
    }

    /// `[index/Q_level, (index+1)/Q_level]` for grid families.
    pub fn grid_set(&self, level: u32, index: BigUint) -> Result<CoveringSet, CoveringError> {
        let q = self.grid.as_ref().expect("grid family");
        let den: BigInt = q.product_prefix(level as usize)?.into();
        let i: BigInt = index.clone().into();
        let lo = Rational::new(i.clone(), den.clone());
        let hi = Rational::new(i + 1, den);
        Ok(CoveringSet::new(Arc::clone(&self.id), level, index, lo, hi))
    }

    /// The set with the given level and index.
    pub fn set_at(&self, level: u32, index: &BigUint) -> Result<CoveringSet, CoveringError> {
        let bad = || CoveringError::InvalidIndex { level, index: index.to_string() };
        match &self.grid {
            Some(q) => {
                self.check_level(level)?;
                if index >= &q.product_prefix(level as usize)? {
                    return Err(bad());
                }
                self.grid_set(level, index.clone())
            }
            None => {
                let w = CfWord::from_index(index);
                if w.len() != level as usize {
                    return Err(bad());
                }
                Ok(cf_cylinder(&w))
            }
        }
    }

    fn check_own(&self, set: &CoveringSet) -> Result<(), CoveringError> {
        if set.family() != &*self.id {
            return Err(CoveringError::ForeignSet { set: set.to_string(), family: self.id.to_string() });
        }
        if self.grid.is_some() {
            // rejects hand-built sets whose index lies past Q_level
            self.set_at(set.level(), set.index())?;
        }
        Ok(())
    }

    fn check_level(&self, level: u32) -> Result<(), CoveringError> {
        if let Some(q) = &self.grid {
            if !q.is_defined(level as usize) {
                // surfaces the numeric list-exhaustion error
                q.product_prefix(level as usize)?;
            }
        }
        Ok(())
    }

    fn grid_range(
        &self,
        level: u32,
        lo: BigUint,
        hi: BigUint,
        window: &Window,
    ) -> Result<Vec<CoveringSet>, CoveringError> {
        let (lo, hi) = match &window.index_range {
            Some((a, b)) => (lo.max(a.clone()), hi.min(b.clone())),
            None => (lo, hi),
        };
        if hi <= lo {
            return Ok(Vec::new());
        }
        let count = &hi - &lo;
        if count > BigUint::from(ENUMERATION_LIMIT) {
            return Err(CoveringError::TooMany { level, count: count.to_string() });
        }
        let n = count.to_u64().expect("bounded");
        let mut out = Vec::with_capacity(n as usize);
        let mut i = lo;
        for _ in 0..n {
            out.push(self.grid_set(level, i.clone())?);
            i += 1u32;
        }
        Ok(out)
    }

    fn cf_words(level: u32, max_term: u64) -> Result<Vec<CfWord>, CoveringError> {
        let count = BigUint::from(max_term).pow(level);
        if count > BigUint::from(ENUMERATION_LIMIT) {
            return Err(CoveringError::TooMany { level, count: count.to_string() });
        }
        let mut words = vec![CfWord::from_u64(&[]).expect("empty word")];
        for _ in 0..level {
            words = words
                .iter()
                .flat_map(|w| (1..=max_term).map(move |a| w.extended(a.into())))
                .collect();
        }
        Ok(words)
    }
}

impl PartialEq for CoveringFamily {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl fmt::Display for CoveringFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl Family for CoveringFamily {
    fn id(&self) -> &str {
        &self.id
    }

    fn intersection_constant(&self) -> usize {
        2
    }

    fn children_partition_parent(&self) -> bool {
        self.grid.is_some()
    }

    fn max_level(&self) -> Option<u32> {
        self.grid.as_ref().and_then(|q| q.len()).map(|n| n as u32)
    }

    fn level_sets(&self, level: u32, window: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
        self.check_level(level)?;
        match &self.grid {
            Some(q) => {
                let total = q.product_prefix(level as usize)?;
                self.grid_range(level, BigUint::zero(), total, window)
            }
            None => {
                if level == 0 {
                    return Ok(vec![cf_cylinder(&CfWord::from_u64(&[]).expect("empty word"))]);
                }
                let t = window.max_term.ok_or(CoveringError::MissingWindow)?;
                Ok(Self::cf_words(level, t)?.iter().map(cf_cylinder).collect())
            }
        }
    }

    fn children(&self, set: &CoveringSet, window: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
        self.check_own(set)?;
        let level = set.level() + 1;
        self.check_level(level)?;
        match &self.grid {
            Some(q) => {
                let n = q.term(level as usize)?;
                let lo = set.index() * &n;
                let hi = &lo + n;
                self.grid_range(level, lo, hi, window)
            }
            None => {
                let t = window.max_term.ok_or(CoveringError::MissingWindow)?;
                let u = CfWord::from_index(set.index());
                Ok((1..=t).map(|a| cf_cylinder(&u.extended(a.into()))).collect())
            }
        }
    }

    fn parent(&self, set: &CoveringSet) -> Result<CoveringSet, CoveringError> {
        self.check_own(set)?;
        if set.level() == 0 {
            return Err(CoveringError::NoParent);
        }
        match &self.grid {
            Some(q) => {
                let n = q.term(set.level() as usize)?;
                self.set_at(set.level() - 1, &(set.index() / n))
            }
            None => {
                let u = CfWord::from_index(set.index());
                let terms = u.terms();
                Ok(cf_cylinder(&CfWord::new(terms[..terms.len() - 1].to_vec()).expect("positive terms")))
            }
        }
    }

    fn sets_containing(&self, q: &Rational, level: u32, window: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
        check_unit(q)?;
        self.check_level(level)?;
        let in_window = |s: &CoveringSet| match &window.index_range {
            Some((a, b)) => a <= s.index() && s.index() < b,
            None => true,
        };
        let out = match &self.grid {
            Some(qs) => {
                let total = qs.product_prefix(level as usize)?;
                let scaled = q * Rational::from_integer(total.clone().into());
                let a = scaled.floor().to_integer().to_biguint().expect("nonnegative");
                let mut idx = Vec::new();
                if scaled.is_integer() {
                    if !a.is_zero() {
                        idx.push(&a - 1u32);
                    }
                    if a < total {
                        idx.push(a);
                    }
                } else {
                    idx.push(a);
                }
                idx.into_iter().map(|i| self.grid_set(level, i)).collect::<Result<Vec<_>, _>>()?
            }
            None => {
                let mut words: Vec<CfWord> = Vec::new();
                for w in cf_forms(q) {
                    if w.len() >= level as usize {
                        let p = CfWord::new(w.terms()[..level as usize].to_vec()).expect("positive terms");
                        if !words.contains(&p) {
                            words.push(p);
                        }
                    }
                }
                if level == 0 {
                    words = vec![CfWord::from_u64(&[]).expect("empty word")];
                }
                let mut sets: Vec<CoveringSet> = words.iter().map(cf_cylinder).collect();
                sets.sort_by(|a, b| a.lo().cmp(b.lo()));
                sets
            }
        };
        debug_assert!(out.iter().all(|s| s.contains_point(q)), "{}", format_rational(q));
        Ok(out.into_iter().filter(in_window).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{max_incomparable_through_point, phi_representation, TieRule};
    use crate::numeric::rat;

    fn bounds(sets: &[CoveringSet]) -> Vec<(Rational, Rational)> {
        sets.iter().map(|s| (s.lo().clone(), s.hi().clone())).collect()
    }

    #[test]
    fn level_sets_examples() {
        let d = CoveringFamily::dyadic();
        assert_eq!(
            bounds(&d.level_sets(1, &Window::all()).unwrap()),
            vec![(rat(0, 1), rat(1, 2)), (rat(1, 2), rat(1, 1))]
        );
        let c = CoveringFamily::parse("cantor:factorial:").unwrap();
        let l2 = c.level_sets(2, &Window::all()).unwrap();
        assert_eq!(l2.len(), 6);
        assert!(l2.iter().all(|s| s.diameter() == rat(1, 6)));
        let cf = CoveringFamily::continued_fraction();
        assert_eq!(
            bounds(&cf.level_sets(1, &Window::max_term(3)).unwrap()),
            vec![(rat(1, 2), rat(1, 1)), (rat(1, 3), rat(1, 2)), (rat(1, 4), rat(1, 3))]
        );
        assert_eq!(cf.level_sets(1, &Window::all()), Err(CoveringError::MissingWindow));
        assert!(matches!(d.level_sets(20, &Window::all()), Err(CoveringError::TooMany { .. })));
        assert_eq!(d.level_sets(20, &Window::indices(3, 5)).unwrap().len(), 2);
    }

    #[test]
    fn diameters() {
        let d = CoveringFamily::dyadic();
        assert_eq!(d.grid_set(3, 5u32.into()).unwrap().diameter(), rat(1, 8));
        let c = CoveringFamily::parse("cantor:list:2,3,4").unwrap();
        assert!(c.level_sets(3, &Window::all()).unwrap().iter().all(|s| s.diameter() == rat(1, 24)));
        assert!(c.level_sets(4, &Window::all()).is_err());
        assert_eq!(c.max_level(), Some(3));
    }

    #[test]
    fn children_and_parents() {
        let d = CoveringFamily::dyadic();
        let half = d.grid_set(1, 0u32.into()).unwrap();
        assert_eq!(
            bounds(&d.children(&half, &Window::all()).unwrap()),
            vec![(rat(0, 1), rat(1, 4)), (rat(1, 4), rat(1, 2))]
        );
        assert_eq!(d.parent(&d.grid_set(2, 1u32.into()).unwrap()).unwrap(), half);

        let c = CoveringFamily::parse("cantor:list:2,3,4").unwrap();
        let kids = c.children(&c.grid_set(1, 0u32.into()).unwrap(), &Window::all()).unwrap();
        assert_eq!(kids.len(), 3);
        assert!(kids.iter().all(|k| k.diameter() == rat(1, 6)));
        let p = c.parent(&kids[1]).unwrap();
        assert_eq!((p.lo().clone(), p.hi().clone()), (rat(0, 1), rat(1, 2)));

        let cf = CoveringFamily::continued_fraction();
        let c2 = cf_cylinder(&CfWord::from_u64(&[2]).unwrap());
        let kids = cf.children(&c2, &Window::max_term(2)).unwrap();
        assert_eq!(kids, vec![
            cf_cylinder(&CfWord::from_u64(&[2, 1]).unwrap()),
            cf_cylinder(&CfWord::from_u64(&[2, 2]).unwrap()),
        ]);
        assert_eq!(cf.parent(&kids[1]).unwrap(), c2);
        assert_eq!(cf.children(&c2, &Window::all()), Err(CoveringError::MissingWindow));
        assert_eq!(cf.parent(&cf.level_sets(0, &Window::all()).unwrap()[0]), Err(CoveringError::NoParent));
        assert!(matches!(d.parent(&c2), Err(CoveringError::ForeignSet { .. })));
    }

    #[test]
    fn containing_examples() {
        let d = CoveringFamily::dyadic();
        assert_eq!(d.sets_containing(&rat(1, 2), 1, &Window::all()).unwrap().len(), 2);
        assert_eq!(
            bounds(&d.sets_containing(&rat(1, 3), 2, &Window::all()).unwrap()),
            vec![(rat(1, 4), rat(1, 2))]
        );
        let c = CoveringFamily::parse("cantor:list:2,3").unwrap();
        assert_eq!(c.sets_containing(&rat(1, 6), 2, &Window::all()).unwrap().len(), 2);
        assert_eq!(d.sets_containing(&rat(0, 1), 5, &Window::all()).unwrap().len(), 1);
        assert_eq!(d.sets_containing(&rat(1, 1), 5, &Window::all()).unwrap().len(), 1);

        let cf = CoveringFamily::continued_fraction();
        // 1/2 = [2] = [1,1]: endpoint of C_[2] and C_[1]
        let s = cf.sets_containing(&rat(1, 2), 1, &Window::all()).unwrap();
        assert_eq!(bounds(&s), vec![(rat(1, 3), rat(1, 2)), (rat(1, 2), rat(1, 1))]);
        assert!(cf.sets_containing(&rat(0, 1), 1, &Window::all()).unwrap().is_empty());
    }

    #[test]
    fn phi_examples() {
        let d = CoveringFamily::dyadic();
        let r = phi_representation(&d, &rat(1, 3), 3, TieRule::Left).unwrap();
        assert_eq!(r.chain[1].hi(), &rat(1, 2));
        assert_eq!((r.chain[2].lo().clone(), r.chain[2].hi().clone()), (rat(1, 4), rat(1, 2)));
        assert!(r.chain.iter().all(|s| s.contains_point(&rat(1, 3))));

        let c = CoveringFamily::parse("cantor:list:2,3,4").unwrap();
        let r = phi_representation(&c, &rat(5, 24), 3, TieRule::Right).unwrap();
        assert_eq!(
            bounds(&r.chain[1..]),
            vec![(rat(0, 1), rat(1, 2)), (rat(1, 6), rat(2, 6)), (rat(5, 24), rat(6, 24))]
        );
        let r = phi_representation(&c, &rat(5, 24), 3, TieRule::Left).unwrap();
        assert_eq!(r.chain[3].hi(), &rat(5, 24));

        let r = phi_representation(&d, &rat(0, 1), 6, TieRule::Left).unwrap();
        assert!(r.chain.iter().all(|s| s.index().is_zero()));

        let cf = CoveringFamily::continued_fraction();
        assert!(matches!(
            phi_representation(&cf, &rat(1, 2), 3, TieRule::Left),
            Err(CoveringError::Exhausted { level: 2, .. })
        ));
    }

    #[test]
    fn intersection_at_grid_point_is_two() {
        let d = CoveringFamily::dyadic();
        let mut all = Vec::new();
        for level in 0..=6 {
            all.extend(d.sets_containing(&rat(1, 2), level, &Window::all()).unwrap());
        }
        assert_eq!(max_incomparable_through_point(&all), 2);
    }
}
