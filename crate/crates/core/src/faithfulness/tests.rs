use super::*;
use crate::numeric::rat;
use proptest::prelude::*;

#[test]
fn constant_base_is_one_over_k_minus_one() {
    for b in [2, 10, 8, 6] {
        let p = loglimit_terms(&QSequence::constant(b).unwrap(), 10_000).unwrap();
        assert_eq!(p.terms.len(), 9_999);
        for t in &p.terms {
            assert!(t.exact);
            assert_eq!(t.value, rat(1, t.k as i64 - 1), "b={b} k={}", t.k);
        }
    }
}

#[test]
fn pow2_and_doublepow2() {
    let p = loglimit_terms(&QSequence::pow2(), 300).unwrap();
    for t in &p.terms {
        assert_eq!(t.value, rat(2, t.k as i64 - 1));
    }
    assert_eq!(p.term(11).unwrap().value, rat(1, 5));
    let d = loglimit_terms(&QSequence::double_pow2(), 20).unwrap();
    assert_eq!(d.term(10).unwrap().value, rat(1024, 1022));
    for t in &d.terms {
        let two_k = 1i64 << t.k;
        assert_eq!(t.value, rat(two_k, two_k - 2));
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

#[test]
fn factorial_enclosures() {
    let p = loglimit_terms(&QSequence::factorial(), 1024).unwrap();
    for t in &p.terms {
        assert!(!t.exact);
        assert!(&t.hi - &t.lo < pow2(-30));
        // n_k = k + 1, Q_{k-1} = k!
        let oracle = ((t.k + 1) as f64).ln() / ln_factorial(t.k);
        assert!((to_f64(&t.value) - oracle).abs() < 1e-9, "k={}", t.k);
        assert!(rat(t.bits_n as i64 - 1, t.bits_q as i64) <= t.lo);
        assert!(t.hi <= rat(t.bits_n as i64, t.bits_q as i64 - 1));
    }
    let c = classify(&p, Some((512, 1024)), &rat(1, 20), &rat(1, 2)).unwrap();
    assert!(c.tail_max.unwrap() < rat(1, 5));
}

#[test]
fn non_power_list_enclosure() {
    let p = loglimit_terms(&QSequence::list(&[3, 5, 7, 1000]).unwrap(), 4).unwrap();
    let oracle = [5f64.ln() / 3f64.ln(), 7f64.ln() / 15f64.ln(), 1000f64.ln() / 105f64.ln()];
    for (t, o) in p.terms.iter().zip(oracle) {
        assert!((to_f64(&t.value) - o).abs() < 1e-9);
        assert!(t.lo <= t.value && t.value <= t.hi);
    }
}

#[test]
fn builtin_verdicts() {
    let (z, a) = default_tolerances();
    for ex in builtin_examples() {
        let p = loglimit_terms(&ex.q, ex.k_max).unwrap();
        let c = classify(&p, None, &z, &a).unwrap();
        assert_eq!(c.verdict, ex.expected, "{}\n{c}", ex.q);
    }
}

#[test]
fn doublepow2_tail_min() {
    let p = loglimit_terms(&QSequence::double_pow2(), 20).unwrap();
    let c = classify(&p, None, &rat(1, 20), &rat(1, 2)).unwrap();
    assert_eq!(c.verdict, Verdict::BoundedAway);
    assert!(c.tail_min.unwrap() > rat(99, 100));
    assert_eq!(c.window, Some((11, 20)));
}

#[test]
fn const2_kmax_64() {
    let p = loglimit_terms(&QSequence::constant(2).unwrap(), 64).unwrap();
    let c = classify(&p, None, &rat(1, 20), &rat(1, 2)).unwrap();
    assert_eq!(c.verdict, Verdict::ConvergesToZero);
}

#[test]
fn exhausted_list_is_inconclusive() {
    let p = loglimit_terms(&QSequence::list(&[2, 3]).unwrap(), 10).unwrap();
    assert_eq!(p.exhausted_at, Some(3));
    assert_eq!(p.terms.len(), 1);
    let c = classify(&p, None, &rat(1, 20), &rat(1, 2)).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
    assert!(c.justification.contains("exhausted at k = 3"));
}

#[test]
fn errors_and_formatting() {
    assert_eq!(loglimit_terms(&QSequence::pow2(), 1), Err(FaithfulnessError::KMaxTooSmall(1)));
    let p = loglimit_terms(&QSequence::pow2(), 10).unwrap();
    assert!(classify(&p, Some((1, 5)), &rat(1, 20), &rat(1, 2)).is_err());
    assert!(classify(&p, Some((5, 11)), &rat(1, 20), &rat(1, 2)).is_err());
    assert!(classify(&p, None, &rat(0, 1), &rat(1, 2)).is_err());
    assert_eq!(decimal(&rat(1, 3), 4), "0.3333");
    assert_eq!(decimal(&rat(-5, 2), 2), "-2.50");
    let csv = p.to_csv();
    assert!(csv.starts_with("# q=pow2:\n# k_max=10\nk,lambda,lambda_lo,lambda_hi,exact\n2,2.000000000000,"));
    assert_eq!(csv.lines().count(), 3 + 9);
}

#[test]
fn oscillation_is_reported() {
    let p = loglimit_terms(&QSequence::list(&[2, 2, 1024, 2, 1024, 2, 1024, 2]).unwrap(), 8).unwrap();
    let c = classify(&p, Some((2, 8)), &rat(1, 20), &rat(1, 2)).unwrap();
    assert!(c.direction_changes >= 4);
    assert_eq!(c.verdict, Verdict::Inconclusive);
}

proptest! {
    #[test]
    fn loosening_zero_tol_keeps_zero(terms in proptest::collection::vec(2u64..50, 6..30), z in 1i64..100, extra in 0i64..100) {
        let p = loglimit_terms(&QSequence::list(&terms).unwrap(), terms.len()).unwrap();
        let away = rat(1, 2);
        let tight = classify(&p, None, &rat(z, 100), &away).unwrap();
        let loose = classify(&p, None, &rat(z + extra, 100), &away).unwrap();
        if tight.verdict == Verdict::ConvergesToZero {
            prop_assert_eq!(loose.verdict, Verdict::ConvergesToZero);
        }
        prop_assert_eq!(tight.tail_min, loose.tail_min);
    }

    #[test]
    fn enclosures_contain_float_value(terms in proptest::collection::vec(2u64..100_000, 2..12)) {
        let p = loglimit_terms(&QSequence::list(&terms).unwrap(), terms.len()).unwrap();
        for t in &p.terms {
            let prefix: f64 = terms[..t.k - 1].iter().map(|&x| (x as f64).log2()).sum();
            let v = (terms[t.k - 1] as f64).log2() / prefix;
            prop_assert!((to_f64(&t.value) - v).abs() < 1e-9);
            prop_assert!(t.lo <= t.hi);
        }
    }
}
