use super::*;
use crate::dimension::{block_entropy_oracle, lz_oracle};
use crate::sampling::{pseudorandom_bits, GOLDEN_SEED};
use proptest::prelude::*;

fn opts(offset: usize, count: usize, budget: usize) -> ChaseOptions {
    ChaseOptions { offset, count, budget, seed: 11, max_deficit: None }
}

#[test]
fn plan_examples() {
    let p = plan_stages(4, 3).unwrap();
    let b: Vec<_> = p.stages.iter().map(|s| (s.start, s.end)).collect();
    assert_eq!(b, vec![(0, 16), (16, 25), (25, 36)]);
    assert!(plan_stages(1, 3).is_err());
    assert!(plan_stages(4, 0).is_err());
}

proptest! {
    #[test]
    fn plan_tiles(offset in 2usize..50, count in 1usize..60) {
        let p = plan_stages(offset, count).unwrap();
        prop_assert_eq!(p.stages[0].start, 0);
        prop_assert_eq!(p.total_len(), (offset + count - 1).pow(2));
        for w in p.stages.windows(2) {
            prop_assert_eq!(w[0].end, w[1].start);
            prop_assert_eq!(w[1].len(), 2 * (offset + w[1].m) - 1);
        }
    }
}

#[test]
fn threshold_is_exact() {
    assert!(reaches_log2(3, 8));
    assert!(!reaches_log2(3, 9));
    assert!(reaches_log2(4, 9));
    assert!(reaches_log2(200, 9));
    assert!(!reaches_log2(0, 2));
}

#[test]
fn pseudorandom_chase() {
    let x = pseudorandom_bits(GOLDEN_SEED, 28 * 28);
    let (a, b) = (lz_oracle(), block_entropy_oracle(1).unwrap());
    let r = build_chased_sequence(&x, &a, &b, &ChaseOptions { seed: GOLDEN_SEED, ..opts(8, 20, 256) }).unwrap();
    assert_eq!(r.y.len(), 729);
    for l in &r.log {
        assert_eq!(l.mode, StageMode::Complex, "{l:?}");
        let block = l.end - l.start;
        assert!(l.t as f64 >= 0.85 * block as f64, "{l:?}");
    }
    let rep = verify_chase(&x, &r.y, &r, &a, &b, Slack::Fitted).unwrap();
    assert!(rep.structural_ok(), "{rep}");
    assert!(rep.tracking_ok(), "{rep}");
    // slack from the logged constant, four times over
    let c = fitted_constant(&r.log);
    for t in &rep.tracking {
        assert!((t.margin as f64) <= 4.0 * c * (t.n as f64).sqrt() * (t.n as f64).log2());
    }
    let zero = verify_chase(&x, &r.y, &r, &a, &b, Slack::Constant(0.0)).unwrap();
    assert!(!zero.tracking_ok());
    assert!(zero.structural_ok());

    let again = build_chased_sequence(&x, &a, &b, &ChaseOptions { seed: GOLDEN_SEED, ..opts(8, 20, 256) }).unwrap();
    assert_eq!(again, r);
}

#[test]
fn flipped_padding_is_located() {
    let x = pseudorandom_bits(5, 400);
    let (a, b) = (lz_oracle(), block_entropy_oracle(1).unwrap());
    let r = build_chased_sequence(&x, &a, &b, &opts(4, 10, 16)).unwrap();
    let stage = r.plan.stages.iter().find(|s| s.w_len < s.len()).expect("some padding");
    let pos = stage.start + stage.w_len;
    let mut y = r.y.clone();
    y[pos] = true;
    let rep = verify_chase(&x, &y, &r, &a, &b, Slack::Fitted).unwrap();
    assert_eq!(rep.structural.len(), 1);
    assert_eq!(rep.structural[0].position, Some(pos));
    assert_eq!(rep.structural[0].stage, stage.m);
}

#[test]
fn zeros_input() {
    let x = vec![false; 28 * 28];
    let (a, b) = (block_entropy_oracle(1).unwrap(), lz_oracle());
    let r = build_chased_sequence(&x, &a, &b, &opts(8, 20, 32)).unwrap();
    // stage 0 has no prefix to condition on, so its block still costs bits
    assert_eq!(r.log[0].mode, StageMode::Complex);
    assert!(r.log[1..].iter().all(|l| l.mode == StageMode::Zeros));
    assert!(r.y[64..].iter().all(|&b| !b));
    let rep = verify_chase(&x, &r.y, &r, &a, &b, Slack::Fitted).unwrap();
    assert!(rep.structural_ok());
}

#[test]
fn single_stage() {
    let x = pseudorandom_bits(2, 100);
    let (a, b) = (lz_oracle(), lz_oracle());
    let r = build_chased_sequence(&x, &a, &b, &opts(5, 1, 8)).unwrap();
    assert_eq!(r.y.len(), 25);
    let s = &r.plan.stages[0];
    assert!(r.y[s.w_len..].iter().all(|&b| !b));
}

#[test]
fn empty_context_scores_length() {
    let x = pseudorandom_bits(8, 100);
    let (a, b) = (lz_oracle(), block_entropy_oracle(1).unwrap());
    let r = build_chased_sequence(&x, &a, &b, &opts(3, 2, 64)).unwrap();
    let first = &r.plan.stages[0];
    let w = &r.y[..first.w_len];
    // empty context: every candidate scores |w|, so the smallest string wins
    let score = b.conditional_estimate(w, &[]).unwrap();
    assert_eq!(Some(score), r.log[0].score);
    assert_eq!(score, first.w_len as u64);
    assert!(r.log[0].winner.is_some());
}

#[test]
fn errors() {
    let (a, b) = (lz_oracle(), lz_oracle());
    let x = vec![false; 10];
    assert!(matches!(build_chased_sequence(&x, &a, &b, &opts(4, 3, 1)), Err(ConstructError::InputTooShort { required: 36, .. })));
    assert!(matches!(build_chased_sequence(&x, &a, &b, &opts(2, 1, 0)), Err(ConstructError::NoBudget)));
    let x = pseudorandom_bits(1, 100);
    let strict = ChaseOptions { max_deficit: Some(0), ..opts(4, 3, 1) };
    let lenient = build_chased_sequence(&x, &a, &b, &opts(4, 3, 1)).unwrap();
    let over = lenient.log.iter().any(|l| l.deficit.is_some_and(|d| d > 0));
    assert_eq!(build_chased_sequence(&x, &a, &b, &strict).is_err(), over);
}

#[test]
fn log_is_json_lines() {
    let x = pseudorandom_bits(3, 100);
    let r = build_chased_sequence(&x, &lz_oracle(), &lz_oracle(), &opts(3, 4, 4)).unwrap();
    let text = r.log_jsonl();
    let parsed: Vec<StageLog> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed, r.log);
    assert!(text.contains("\"mode\":\"complex\""));
}
