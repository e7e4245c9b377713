use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use super::{max_incomparable_through_point, CoveringError, CoveringSet, Family, Window};
use crate::numeric::{format_rational, rat, Rational};
use crate::representation::CfWord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axiom {
    Incomparability,
    UniqueParent,
    ChildrenConsistency,
    Fineness,
    FiniteIntersection,
    Enumeration,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Incomparability => "incomparability",
            Axiom::UniqueParent => "unique_parent",
            Axiom::ChildrenConsistency => "children_consistency",
            Axiom::Fineness => "fineness",
            Axiom::FiniteIntersection => "finite_intersection",
            Axiom::Enumeration => "enumeration",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational; neither pass nor fail.
    Note,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Note => "note",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomEntry {
    pub axiom: Axiom,
    pub level: Option<u32>,
    pub witness: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub depth: u32,
    pub samples: Vec<Rational>,
    /// Fineness threshold; defaults to twice the largest level-`depth` diameter.
    pub epsilon: Option<Rational>,
    pub window: Window,
    /// Maximum parents per level whose children are checked.
    pub children_budget: usize,
}

impl VerifyOptions {
    pub fn new(depth: u32) -> Self {
        VerifyOptions { depth, samples: Vec::new(), epsilon: None, window: Window::all(), children_budget: 4096 }
    }
}

#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub family: String,
    pub depth: u32,
    pub epsilon: Rational,
    pub entries: Vec<AxiomEntry>,
    /// Largest incomparable subfamily through a sample point, over all checked levels.
    pub max_intersection: usize,
    pub intersection_constant: usize,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.verdict != Verdict::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Fail)
    }

    pub fn axiom_passes(&self, axiom: Axiom) -> bool {
        self.entries.iter().filter(|e| e.axiom == axiom).all(|e| e.verdict != Verdict::Fail)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "family {} depth {} epsilon {}\n",
            self.family,
            self.depth,
            format_rational(&self.epsilon)
        );
        for e in &self.entries {
            let level = e.level.map_or("-".to_string(), |l| l.to_string());
            out.push_str(&format!("{:<4} {:<21} level {:<3} {}\n", e.verdict, e.axiom, level, e.witness));
        }
        out.push_str(&format!(
            "observed max intersection {} (bound {})\n{}\n",
            self.max_intersection,
            self.intersection_constant,
            if self.all_pass() { "ALL PASS" } else { "FAILURES PRESENT" }
        ));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axiom", "level", "witness", "verdict"]).expect("in-memory write");
        for e in &self.entries {
            let level = e.level.map_or(String::new(), |l| l.to_string());
            w.write_record([e.axiom.name(), &level, &e.witness, &e.verdict.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8")
    }
}

/// Set endpoints probed for the finite-intersection bound.
pub const ENDPOINT_PROBES: usize = 512;

/// Sample points suited to a family: grid points, generic rationals, and
/// (for continued fractions) convergents long enough to reach level `depth`.
pub fn standard_samples(family: &dyn Family, depth: u32) -> Vec<Rational> {
    let mut out: Vec<Rational> = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (5, 24), (1, 7), (3, 11), (17, 31)]
        .iter()
        .map(|&(a, b)| rat(a, b))
        .collect();
    if !family.children_partition_parent() {
        // 0 lies in no cylinder of positive level, and short expansions end early
        out.clear();
        let n = depth as usize + 2;
        let patterns: [&dyn Fn(usize) -> u64; 4] = [
            &|_| 1,
            &|_| 2,
            &|i| if i % 3 == 1 { 2 * (i as u64 / 3 + 1) } else { 1 },
            &|i| [3, 1, 4, 1, 5, 9, 2, 6][i % 8],
        ];
        for p in patterns {
            let mut terms: Vec<u64> = (0..n).map(p).collect();
            if let Some(last) = terms.last_mut() {
                *last = (*last).max(2);
            }
            out.push(CfWord::from_u64(&terms).expect("positive terms").value());
        }
    }
    out
}

fn entry(axiom: Axiom, level: Option<u32>, verdict: Verdict, witness: impl Into<String>) -> AxiomEntry {
    AxiomEntry { axiom, level, witness: witness.into(), verdict }
}

fn pass_fail(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Checks the covering-family axioms on levels `0..=depth`. Problems become
/// report entries; nothing here returns an error.
pub fn verify_family_axioms(family: &dyn Family, opts: &VerifyOptions) -> AxiomReport {
    let mut entries = Vec::new();
    let mut depth = opts.depth.max(1);
    if let Some(m) = family.max_level() {
        if m < depth {
            entries.push(entry(
                Axiom::Enumeration,
                None,
                Verdict::Note,
                format!("family defined through level {m} only; checking levels 0..={m}"),
            ));
            depth = m;
        }
    }

    let mut levels: Vec<Option<Vec<CoveringSet>>> = Vec::new();
    for level in 0..=depth {
        match family.level_sets(level, &opts.window) {
            Ok(sets) => levels.push(Some(sets)),
            Err(e) => {
                entries.push(entry(Axiom::Enumeration, Some(level), Verdict::Note, format!("not enumerated: {e}")));
                levels.push(None);
            }
        }
    }

    let epsilon = opts.epsilon.clone().unwrap_or_else(|| {
        let deepest = levels.iter().rev().flatten().next();
        let d = deepest.and_then(|s| s.iter().map(|u| u.diameter()).max()).unwrap_or_else(Rational::one);
        d * rat(2, 1)
    });

    for (level, sets) in levels.iter().enumerate() {
        let level = level as u32;
        let Some(sets) = sets else { continue };
        entries.push(check_incomparable(level, sets));
        if level >= 1 {
            entries.push(check_parents(family, level, sets, &opts.window));
        }
        if level < depth {
            entries.push(check_children(family, level, sets, opts));
        }
    }

    let c = family.intersection_constant();
    let mut max_intersection = 0;
    let mut samples: BTreeSet<Rational> = opts.samples.iter().cloned().collect();
    if samples.is_empty() {
        samples = standard_samples(family, depth).into_iter().collect();
    }
    for q in &samples {
        let mut through: Vec<CoveringSet> = Vec::new();
        let mut problem = None;
        for level in 0..=depth {
            match family.sets_containing(q, level, &opts.window) {
                Ok(s) => through.extend(s),
                Err(e) => {
                    problem = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = problem {
            entries.push(entry(Axiom::Fineness, None, Verdict::Fail, format!("x={}: {e}", format_rational(q))));
            continue;
        }
        let finest = through.iter().min_by(|a, b| a.diameter().cmp(&b.diameter()));
        let fine = finest.is_some_and(|u| u.diameter() < epsilon);
        let witness = match finest {
            Some(u) => format!("x={} finest {u}", format_rational(q)),
            None => format!("x={} lies in no set", format_rational(q)),
        };
        entries.push(entry(Axiom::Fineness, None, pass_fail(fine), witness));

        let m = max_incomparable_through_point(&through);
        max_intersection = max_intersection.max(m);
        if m > c {
            entries.push(entry(
                Axiom::FiniteIntersection,
                None,
                Verdict::Fail,
                format!("x={}: {m} incomparable sets exceed c={c}", format_rational(q)),
            ));
        }
    }
    // overlaps only happen at shared endpoints, which generic samples miss
    let mut endpoints: BTreeSet<Rational> = BTreeSet::new();
    for sets in levels.iter().skip(1).flatten() {
        for u in sets {
            for p in [u.lo(), u.hi()] {
                if endpoints.len() < ENDPOINT_PROBES && !samples.contains(p) {
                    endpoints.insert(p.clone());
                }
            }
        }
    }
    for q in &endpoints {
        let mut through: Vec<CoveringSet> = Vec::new();
        for level in 0..=depth {
            match family.sets_containing(q, level, &opts.window) {
                Ok(s) if !s.is_empty() => through.extend(s),
                _ => break,
            }
        }
        let m = max_incomparable_through_point(&through);
        max_intersection = max_intersection.max(m);
        if m > c {
            entries.push(entry(
                Axiom::FiniteIntersection,
                None,
                Verdict::Fail,
                format!("endpoint {}: {m} incomparable sets exceed c={c}", format_rational(q)),
            ));
        }
    }
    entries.push(entry(
        Axiom::FiniteIntersection,
        None,
        pass_fail(max_intersection <= c),
        format!(
            "observed max {max_intersection} over {} samples and {} set endpoints, c={c}",
            samples.len(),
            endpoints.len()
        ),
    ));

    AxiomReport {
        family: family.id().to_string(),
        depth,
        epsilon,
        entries,
        max_intersection,
        intersection_constant: c,
    }
}

fn check_incomparable(level: u32, sets: &[CoveringSet]) -> AxiomEntry {
    let mut v: Vec<&CoveringSet> = sets.iter().collect();
    v.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| b.hi().cmp(a.hi())));
    let mut widest: Option<&CoveringSet> = None;
    for s in v {
        if let Some(w) = widest {
            if s.hi() <= w.hi() {
                return entry(Axiom::Incomparability, Some(level), Verdict::Fail, format!("{s} inside {w}"));
            }
        }
        if widest.is_none_or(|w| s.hi() > w.hi()) {
            widest = Some(s);
        }
    }
    entry(Axiom::Incomparability, Some(level), Verdict::Pass, format!("{} sets", sets.len()))
}

fn check_parents(family: &dyn Family, level: u32, sets: &[CoveringSet], window: &Window) -> AxiomEntry {
    let all = Window { max_term: window.max_term, index_range: None };
    for s in sets {
        let mid = (s.lo() + s.hi()) / rat(2, 1);
        let mut supersets: Vec<CoveringSet> = Vec::new();
        for p in [s.lo(), &mid, s.hi()] {
            match family.sets_containing(p, level - 1, &all) {
                Ok(found) => {
                    for f in found {
                        if f.contains(s) && !supersets.contains(&f) {
                            supersets.push(f);
                        }
                    }
                }
                Err(e) => return entry(Axiom::UniqueParent, Some(level), Verdict::Fail, format!("{s}: {e}")),
            }
        }
        let declared = family.parent(s);
        let ok = supersets.len() == 1 && declared.as_ref().ok() == supersets.first();
        if !ok {
            let names: Vec<String> = supersets.iter().map(|u| u.to_string()).collect();
            let declared = declared.map_or_else(|e| e.to_string(), |p| p.to_string());
            return entry(
                Axiom::UniqueParent,
                Some(level),
                Verdict::Fail,
                format!("{s}: supersets [{}], parent() = {declared}", names.join("; ")),
            );
        }
    }
    entry(Axiom::UniqueParent, Some(level), Verdict::Pass, format!("{} children", sets.len()))
}

fn check_children(family: &dyn Family, level: u32, sets: &[CoveringSet], opts: &VerifyOptions) -> AxiomEntry {
    let all = Window { max_term: opts.window.max_term, index_range: None };
    let budget = opts.children_budget.min(sets.len());
    for u in &sets[..budget] {
        let mut kids = match family.children(u, &all) {
            Ok(k) => k,
            Err(CoveringError::TooMany { count, .. }) => {
                return entry(
                    Axiom::ChildrenConsistency,
                    Some(level),
                    Verdict::Note,
                    format!("{u} has {count} children; not enumerated"),
                )
            }
            Err(e) => return entry(Axiom::ChildrenConsistency, Some(level), Verdict::Fail, format!("{u}: {e}")),
        };
        for k in &kids {
            let back = family.parent(k);
            if k.level() != level + 1 || !u.contains(k) || back.as_ref().ok() != Some(u) {
                return entry(Axiom::ChildrenConsistency, Some(level), Verdict::Fail, format!("child {k} of {u}"));
            }
        }
        kids.sort_by(|a, b| a.lo().cmp(b.lo()));
        for pair in kids.windows(2) {
            if pair[1].lo() < pair[0].hi() {
                return entry(
                    Axiom::ChildrenConsistency,
                    Some(level),
                    Verdict::Fail,
                    format!("children {} and {} overlap", pair[0], pair[1]),
                );
            }
        }
        if family.children_partition_parent() {
            let tiles = kids.first().is_some_and(|k| k.lo() == u.lo())
                && kids.last().is_some_and(|k| k.hi() == u.hi())
                && kids.windows(2).all(|p| p[0].hi() == p[1].lo());
            let total: Rational = kids.iter().map(|k| k.diameter()).fold(Rational::zero(), |a, b| a + b);
            if !tiles || total != u.diameter() {
                return entry(
                    Axiom::ChildrenConsistency,
                    Some(level),
                    Verdict::Fail,
                    format!("children of {u} do not tile it (total diameter {})", format_rational(&total)),
                );
            }
        }
    }
    let note = if budget < sets.len() { format!(" (of {})", sets.len()) } else { String::new() };
    entry(Axiom::ChildrenConsistency, Some(level), Verdict::Pass, format!("{budget} parents checked{note}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::CoveringFamily;
    use std::sync::Arc;

    /// A hand-built family whose levels are given explicitly; parents are
    /// found by search.
    struct Explicit {
        levels: Vec<Vec<(Rational, Rational)>>,
    }

    impl Explicit {
        fn set(&self, level: u32, i: usize) -> CoveringSet {
            let (lo, hi) = self.levels[level as usize][i].clone();
            CoveringSet::new(Arc::from("explicit"), level, i.into(), lo, hi)
        }
    }

    impl Family for Explicit {
        fn id(&self) -> &str {
            "explicit"
        }
        fn intersection_constant(&self) -> usize {
            2
        }
        fn children_partition_parent(&self) -> bool {
            false
        }
        fn max_level(&self) -> Option<u32> {
            Some(self.levels.len() as u32 - 1)
        }
        fn level_sets(&self, level: u32, _: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
            Ok((0..self.levels[level as usize].len()).map(|i| self.set(level, i)).collect())
        }
        fn children(&self, set: &CoveringSet, w: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
            Ok(self.level_sets(set.level() + 1, w)?.into_iter().filter(|k| set.contains(k)).collect())
        }
        fn parent(&self, set: &CoveringSet) -> Result<CoveringSet, CoveringError> {
            self.level_sets(set.level() - 1, &Window::all())?
                .into_iter()
                .find(|p| p.contains(set))
                .ok_or(CoveringError::NoParent)
        }
        fn sets_containing(&self, q: &Rational, level: u32, w: &Window) -> Result<Vec<CoveringSet>, CoveringError> {
            Ok(self.level_sets(level, w)?.into_iter().filter(|s| s.contains_point(q)).collect())
        }
    }

    #[test]
    fn dyadic_all_pass() {
        let r = verify_family_axioms(&CoveringFamily::dyadic(), &VerifyOptions::new(8));
        assert!(r.all_pass(), "{}", r.to_text());
        assert_eq!(r.max_intersection, 2);
    }

    #[test]
    fn cantor_all_pass() {
        let f = CoveringFamily::parse("cantor:list:2,3,4,5").unwrap();
        let r = verify_family_axioms(&f, &VerifyOptions::new(4));
        assert!(r.all_pass(), "{}", r.to_text());
        assert_eq!(r.max_intersection, 2);
    }

    #[test]
    fn cf_windowed_pass() {
        let mut o = VerifyOptions::new(4);
        o.window = Window::max_term(4);
        let r = verify_family_axioms(&CoveringFamily::continued_fraction(), &o);
        assert!(r.all_pass(), "{}", r.to_text());
        assert_eq!(r.max_intersection, 2);
    }

    #[test]
    fn finite_list_is_noted() {
        let f = CoveringFamily::parse("cantor:list:2,3").unwrap();
        let r = verify_family_axioms(&f, &VerifyOptions::new(5));
        assert!(r.all_pass());
        assert_eq!(r.depth, 2);
        assert!(r.entries.iter().any(|e| e.verdict == Verdict::Note));
    }

    #[test]
    fn corrupted_double_flags_incomparability() {
        let h = |a, b| rat(a, b);
        let f = Explicit {
            levels: vec![
                vec![(h(0, 1), h(1, 1))],
                vec![(h(0, 1), h(1, 2)), (h(0, 1), h(1, 4)), (h(1, 2), h(1, 1))],
            ],
        };
        let r = verify_family_axioms(&f, &VerifyOptions::new(1));
        assert!(!r.axiom_passes(Axiom::Incomparability));
        assert!(r.to_csv().lines().any(|l| l.starts_with("incomparability,1,") && l.ends_with(",fail")));
    }

    #[test]
    fn double_with_two_parents_flagged() {
        let h = |a, b| rat(a, b);
        let f = Explicit {
            levels: vec![
                vec![(h(0, 1), h(1, 1))],
                vec![(h(0, 1), h(2, 3)), (h(1, 3), h(1, 1))],
                vec![(h(1, 3), h(1, 2)), (h(1, 2), h(2, 3))],
            ],
        };
        let r = verify_family_axioms(&f, &VerifyOptions::new(2));
        assert!(!r.axiom_passes(Axiom::UniqueParent));
    }

    #[test]
    fn overlapping_intervals_exceed_bound() {
        let h = |a, b| rat(a, b);
        let f = Explicit {
            levels: vec![
                vec![(h(0, 1), h(1, 1))],
                vec![(h(0, 1), h(1, 2)), (h(1, 4), h(3, 4)), (h(1, 2), h(1, 1))],
            ],
        };
        let mut o = VerifyOptions::new(1);
        o.samples = vec![h(1, 2)];
        let r = verify_family_axioms(&f, &o);
        assert_eq!(r.max_intersection, 3);
        assert!(!r.axiom_passes(Axiom::FiniteIntersection));
    }
}
