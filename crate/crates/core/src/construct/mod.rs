//! Block-by-block construction of a sequence `Y` whose complexity under one
//! oracle chases the complexity of a given `X` under another.
//!
//! Stages are numbered from 0. Stage 0 covers `[0, M^2)` and stage `m >= 1`
//! covers the half-open block `[(M+m-1)^2, (M+m)^2)`. When
//! `X`'s block carries at least `log2(M+m)` bits of conditional complexity,
//! `Y` gets a string `w_m` of that length chosen to be hard for the second
//! oracle, followed by zero padding; otherwise the block is all zeros.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::{ComplexityOracle, DimensionError};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("M must be at least 2, got {0}")]
    OffsetTooSmall(usize),
    #[error("stage count must be at least 1")]
    NoStages,
    #[error("search budget must be at least 1")]
    NoBudget,
    #[error("input has {available} bits, the plan needs {required}")]
    InputTooShort { required: usize, available: usize },
    #[error("stage {stage}: best candidate scored {score} < t_m = {t} minus allowed deficit {limit}")]
    DeficitExceeded { stage: usize, t: usize, score: u64, limit: u64 },
    #[error(transparent)]
    Oracle(#[from] DimensionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageMode {
    Pending,
    Complex,
    Zeros,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub m: usize,
    pub start: usize,
    pub end: usize,
    pub mode: StageMode,
    pub w_len: usize,
}

impl Stage {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub offset: usize,
    pub stages: Vec<Stage>,
}

impl StagePlan {
    /// Total length `(M + count - 1)^2`.
    pub fn total_len(&self) -> usize {
        self.stages.last().map_or(0, |s| s.end)
    }
}

/// Geometry only: every stage is `Pending` with `w_len = 0`.
pub fn plan_stages(offset: usize, count: usize) -> Result<StagePlan, ConstructError> {
    if offset < 2 {
        return Err(ConstructError::OffsetTooSmall(offset));
    }
    if count == 0 {
        return Err(ConstructError::NoStages);
    }
    let stages = (0..count)
        .map(|m| {
            let start = if m == 0 { 0 } else { (offset + m - 1).pow(2) };
            Stage { m, start, end: (offset + m).pow(2), mode: StageMode::Pending, w_len: 0 }
        })
        .collect();
    Ok(StagePlan { offset, stages })
}

/// `t >= log2(a)`, exactly.
fn reaches_log2(t: usize, a: usize) -> bool {
    t >= usize::BITS as usize || (1usize << t) >= a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    Random,
    Ones,
    XPrefix,
}

/// One line of the stage log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub stage: usize,
    pub start: usize,
    pub end: usize,
    /// `oracle_a.conditional_estimate(X[s..e), X[0..s))` before clamping.
    pub t_raw: u64,
    pub t: usize,
    pub clamped: bool,
    pub threshold_log2: f64,
    pub mode: StageMode,
    /// Best `oracle_b.conditional_estimate(w, Y[0..s))`; `None` in zeros mode.
    pub score: Option<u64>,
    pub winner: Option<CandidateKind>,
    pub candidates: usize,
    /// `t - score`, negative when the chosen string scores above target.
    pub deficit: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaseResult {
    pub y: Vec<bool>,
    pub plan: StagePlan,
    pub log: Vec<StageLog>,
    pub oracle_a: String,
    pub oracle_b: String,
    pub seed: u64,
    pub budget: usize,
    /// Largest deficit over complex stages (at least 0): the measured `c_K`.
    pub c_k: u64,
}

impl ChaseResult {
    pub fn log_jsonl(&self) -> String {
        self.log.iter().map(|l| serde_json::to_string(l).expect("plain data") + "\n").collect()
    }
}

#[derive(Debug, Clone)]
pub struct ChaseOptions {
    pub offset: usize,
    pub count: usize,
    pub budget: usize,
    pub seed: u64,
    /// Abort when a stage's best deficit exceeds this.
    pub max_deficit: Option<u64>,
}

/// Runs the construction on `x`. Candidates per complex stage: `budget`
/// seeded random strings, the all-ones string and the prefix of `X`'s
/// block. The highest score wins; ties go to the lexicographically smallest
/// string (`0 < 1`).
pub fn build_chased_sequence(
    x: &[bool],
    oracle_a: &dyn ComplexityOracle,
    oracle_b: &dyn ComplexityOracle,
    opts: &ChaseOptions,
) -> Result<ChaseResult, ConstructError> {
    if opts.budget == 0 {
        return Err(ConstructError::NoBudget);
    }
    let mut plan = plan_stages(opts.offset, opts.count)?;
    let total = plan.total_len();
    if x.len() < total {
        return Err(ConstructError::InputTooShort { required: total, available: x.len() });
    }
    let mut rng = sampling::rng(opts.seed);
    let mut y: Vec<bool> = Vec::with_capacity(total);
    let mut log = Vec::with_capacity(plan.stages.len());
    let mut c_k = 0u64;

    for stage in &mut plan.stages {
        let (s, e) = (stage.start, stage.end);
        let t_raw = oracle_a.conditional_estimate(&x[s..e], &x[..s])?;
        let block = e - s;
        let clamped = t_raw > block as u64;
        let t = if clamped { block } else { t_raw as usize };
        let base = opts.offset + stage.m;
        let mut entry = StageLog {
            stage: stage.m,
            start: s,
            end: e,
            t_raw,
            t,
            clamped,
            threshold_log2: (base as f64).log2(),
            mode: StageMode::Zeros,
            score: None,
            winner: None,
            candidates: 0,
            deficit: None,
        };
        if reaches_log2(t, base) {
            let mut best: Option<(u64, Vec<bool>, CandidateKind)> = None;
            let mut consider = |w: Vec<bool>, kind: CandidateKind| -> Result<(), ConstructError> {
                let score = oracle_b.conditional_estimate(&w, &y)?;
                let better = match &best {
                    None => true,
                    Some((bs, bw, _)) => score > *bs || (score == *bs && w < *bw),
                };
                if better {
                    best = Some((score, w, kind));
                }
                Ok(())
            };
            for _ in 0..opts.budget {
                consider(sampling::fill_bits(&mut rng, t), CandidateKind::Random)?;
            }
            consider(vec![true; t], CandidateKind::Ones)?;
            consider(x[s..s + t].to_vec(), CandidateKind::XPrefix)?;
            let (score, w, kind) = best.expect("budget >= 1");
            let deficit = t as i64 - score as i64;
            if let Some(limit) = opts.max_deficit {
                if deficit > limit as i64 {
                    return Err(ConstructError::DeficitExceeded { stage: stage.m, t, score, limit });
                }
            }
            c_k = c_k.max(deficit.max(0) as u64);
            y.extend_from_slice(&w);
            entry.mode = StageMode::Complex;
            entry.score = Some(score);
            entry.winner = Some(kind);
            entry.candidates = opts.budget + 2;
            entry.deficit = Some(deficit);
            stage.mode = StageMode::Complex;
            stage.w_len = t;
        } else {
            stage.mode = StageMode::Zeros;
        }
        y.resize(e, false);
        log.push(entry);
    }
    Ok(ChaseResult {
        y,
        plan,
        log,
        oracle_a: oracle_a.label(),
        oracle_b: oracle_b.label(),
        seed: opts.seed,
        budget: opts.budget,
        c_k,
    })
}

/// Allowed tracking error at a boundary `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slack {
    /// `c * sqrt(n) * log2(n)` with `c` fitted from the stage log.
    Fitted,
    /// `c * sqrt(n) * log2(n)` with a given `c`.
    Scaled(f64),
    /// A fixed number of bits at every boundary.
    Constant(f64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructuralViolation {
    pub stage: usize,
    pub position: Option<usize>,
    pub what: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCheck {
    pub stage: usize,
    pub n: usize,
    pub k_a_x: u64,
    pub k_b_y: u64,
    pub margin: u64,
    pub slack: f64,
    pub ok: bool,
    /// `oracle_a` on `Y`: reported only, to compare with `k_b_y`.
    pub shadow_k_a_y: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaseReport {
    pub structural: Vec<StructuralViolation>,
    pub tracking: Vec<BoundaryCheck>,
    /// The `c` used for the slack function, when it scales.
    pub c: Option<f64>,
}

impl ChaseReport {
    pub fn structural_ok(&self) -> bool {
        self.structural.is_empty()
    }

    pub fn tracking_ok(&self) -> bool {
        self.tracking.iter().all(|b| b.ok)
    }

    pub fn first_tracking_failure(&self) -> Option<&BoundaryCheck> {
        self.tracking.iter().find(|b| !b.ok)
    }
}

impl fmt::Display for ChaseReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "structural: {}", if self.structural_ok() { "pass" } else { "FAIL" })?;
        for v in &self.structural {
            match v.position {
                Some(p) => writeln!(f, "  stage {} position {}: {}", v.stage, p, v.what)?,
                None => writeln!(f, "  stage {}: {}", v.stage, v.what)?,
            }
        }
        if let Some(c) = self.c {
            writeln!(f, "slack constant c = {c:.4}")?;
        }
        writeln!(f, "tracking: {}", if self.tracking_ok() { "pass" } else { "FAIL (soft)" })?;
        writeln!(f, "  stage      n   K_a(X)   K_b(Y)  margin     slack  shadow K_a(Y)")?;
        for b in &self.tracking {
            writeln!(
                f,
                "  {:>5} {:>6} {:>8} {:>8} {:>7} {:>9.1}  {:>8}{}",
                b.stage,
                b.n,
                b.k_a_x,
                b.k_b_y,
                b.margin,
                b.slack,
                b.shadow_k_a_y,
                if b.ok { "" } else { "  exceeded" }
            )?;
        }
        write!(f, "shadow column is a surrogate comparison only; nothing is asserted about it")
    }
}

/// `1 + max |t_m - score_m| / log2(e_m)` over complex stages.
pub fn fitted_constant(log: &[StageLog]) -> f64 {
    let worst = log
        .iter()
        .filter_map(|l| l.score.map(|s| (l.t as f64 - s as f64).abs() / (l.end as f64).log2()))
        .fold(0.0, f64::max);
    1.0 + worst
}

fn scaled(c: f64, n: usize) -> f64 {
    let n = n as f64;
    c * n.sqrt() * n.log2()
}

/// Structural checks are exact; tracking compares `oracle_a(X|n)` with
/// `oracle_b(Y|n)` at every stage end.
pub fn verify_chase(
    x: &[bool],
    y: &[bool],
    result: &ChaseResult,
    oracle_a: &dyn ComplexityOracle,
    oracle_b: &dyn ComplexityOracle,
    slack: Slack,
) -> Result<ChaseReport, ConstructError> {
    let plan = &result.plan;
    let mut structural = Vec::new();
    let mut bad = |stage, position, what: String| structural.push(StructuralViolation { stage, position, what });

    let expected = plan_stages(plan.offset, plan.stages.len())?;
    for (got, want) in plan.stages.iter().zip(&expected.stages) {
        if (got.m, got.start, got.end) != (want.m, want.start, want.end) {
            bad(got.m, None, format!("boundaries ({}, {}) expected ({}, {})", got.start, got.end, want.start, want.end));
        }
    }
    if y.len() != plan.total_len() {
        bad(0, None, format!("Y has {} bits, plan ends at {}", y.len(), plan.total_len()));
    }
    for (stage, entry) in plan.stages.iter().zip(&result.log) {
        let logged = match entry.mode {
            StageMode::Complex => entry.t,
            _ => 0,
        };
        if stage.mode != entry.mode || stage.w_len != logged {
            bad(stage.m, None, format!("w_len {} / mode {:?} disagree with log (t = {}, {:?})", stage.w_len, stage.mode, entry.t, entry.mode));
        }
        if stage.mode == StageMode::Pending {
            bad(stage.m, None, "stage never ran".into());
        }
        let pad_from = (stage.start + stage.w_len).min(y.len());
        let pad_to = stage.end.min(y.len());
        if let Some(off) = y[pad_from..pad_to].iter().position(|&b| b) {
            bad(stage.m, Some(pad_from + off), "padding bit is 1".into());
        }
    }

    let c = match slack {
        Slack::Fitted => Some(fitted_constant(&result.log)),
        Slack::Scaled(c) => Some(c),
        Slack::Constant(_) => None,
    };
    let mut tracking = Vec::new();
    for stage in &plan.stages {
        let n = stage.end;
        if n > x.len() || n > y.len() {
            break;
        }
        let k_a_x = oracle_a.estimate(&x[..n])?;
        let k_b_y = oracle_b.estimate(&y[..n])?;
        let shadow_k_a_y = oracle_a.estimate(&y[..n])?;
        let margin = k_a_x.abs_diff(k_b_y);
        let allowed = match (slack, c) {
            (Slack::Constant(b), _) => b,
            (_, Some(c)) => scaled(c, n),
            _ => unreachable!(),
        };
        tracking.push(BoundaryCheck {
            stage: stage.m,
            n,
            k_a_x,
            k_b_y,
            margin,
            slack: allowed,
            ok: margin as f64 <= allowed,
            shadow_k_a_y,
        });
    }
    Ok(ChaseReport { structural, tracking, c })
}

#[cfg(test)]
mod tests;
