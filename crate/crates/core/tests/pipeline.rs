// Cross-module checks through the public API only.

use std::sync::Arc;

use num_traits::{One, Zero};
use phidim::construct::{build_chased_sequence, verify_chase, ChaseOptions, Slack};
use phidim::covering::{verify_family_axioms, CoveringFamily, Family, VerifyOptions, Window};
use phidim::dimension::{
    block_entropy_oracle, cdim_estimate, cdim_phi_estimate, default_phi_kmax, dilution_witness, lz_oracle, plain_grid,
};
use phidim::faithfulness::{classify, default_tolerances, loglimit_terms, Verdict};
use phidim::gale::{cover_to_gale, gale_to_cover, kraft_check, Supergale};
use phidim::numeric::{rat, Exponent, QSequence, Rational};
use phidim::representation::{cantor_decode, cantor_encode};
use phidim::sampling::{pseudorandom_bits, GOLDEN_SEED};

#[test]
fn encoded_point_lies_in_the_matching_cantor_set() {
    let fam = CoveringFamily::parse("cantor:list:3,5,7").unwrap();
    let q = Arc::new(QSequence::parse("list:3,5,7").unwrap());
    let x = rat(22, 31);
    let digits = cantor_encode(&x, &q, 3).unwrap();
    let lo = cantor_decode(&digits).unwrap();
    let found = fam.sets_containing(&x, 3, &Window::all()).unwrap();
    assert!(found.iter().any(|s| s.lo() == &lo));
}

#[test]
fn cover_lifted_then_recovered_keeps_kraft_mass() {
    let fam = Arc::new(CoveringFamily::parse("cantor:const:3").unwrap());
    let cover = fam.level_sets(2, &Window::all()).unwrap();
    let g = cover_to_gale(&cover, Exponent::new(1, 1), fam.clone(), 2).unwrap();
    let back = gale_to_cover(&g, 0, &rat(1, 1)).unwrap();
    let k = kraft_check(&g, &back.antichain).unwrap();
    assert!(k.holds);
}

#[test]
fn constant_gale_on_every_grid_family_is_conserved() {
    for spec in ["dyadic", "cantor:const:3", "cantor:pow2:"] {
        let fam = Arc::new(CoveringFamily::parse(spec).unwrap());
        let g = Supergale::constant(fam.clone(), Exponent::new(1, 1), 3, Window::all(), &Rational::one()).unwrap();
        let leaves = fam.level_sets(3, &Window::all()).unwrap();
        let k = kraft_check(&g, &leaves).unwrap();
        assert_eq!(k.antichain_mass, k.root_mass, "{spec}");
    }
}

#[test]
fn shipped_families_verify_at_small_depth() {
    for spec in ["dyadic", "cantor:const:5", "cantor:factorial:"] {
        let fam = CoveringFamily::parse(spec).unwrap();
        let r = verify_family_axioms(&fam, &VerifyOptions::new(4));
        assert!(r.all_pass(), "{spec}: {:?}", r.entries);
    }
}

#[test]
fn faithful_sequence_gives_no_gap_and_the_unfaithful_one_does() {
    let (zero, away) = default_tolerances();
    let pow2 = QSequence::pow2();
    let c = classify(&loglimit_terms(&pow2, 128).unwrap(), None, &zero, &away).unwrap();
    assert_eq!(c.verdict, Verdict::ConvergesToZero);

    let x = pseudorandom_bits(GOLDEN_SEED, 1 << 12);
    let lz = lz_oracle();
    let kmax = default_phi_kmax(&pow2, x.len());
    let phi = cdim_phi_estimate(&x, &pow2, &lz, kmax).unwrap();
    let plain = cdim_estimate(&x, &lz, &plain_grid(x.len())).unwrap();
    assert!(phi.headline() >= plain.headline());

    let dp = QSequence::double_pow2();
    let w = dilution_witness(&dp, &rat(4, 5), 1, 12, GOLDEN_SEED).unwrap();
    let phi = cdim_phi_estimate(&w.bits, &dp, &lz, 12).unwrap();
    let plain = cdim_estimate(&w.bits, &lz, &plain_grid(w.bits.len())).unwrap();
    assert!(phi.headline() - plain.headline() > Rational::zero());
}

#[test]
fn chase_output_verifies_and_has_the_planned_length() {
    let opts = ChaseOptions { offset: 4, count: 6, budget: 32, seed: 3, max_deficit: None };
    let x = pseudorandom_bits(11, 81);
    let (a, b) = (lz_oracle(), block_entropy_oracle(1).unwrap());
    let r = build_chased_sequence(&x, &a, &b, &opts).unwrap();
    assert_eq!(r.y.len(), 81);
    let rep = verify_chase(&x, &r.y, &r, &a, &b, Slack::Fitted).unwrap();
    assert!(rep.structural_ok() && rep.tracking_ok(), "{rep}");
}
