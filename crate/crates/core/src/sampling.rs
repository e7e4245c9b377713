//! Seeded bit sources. Every random choice in the crate goes through
//! ChaCha8 seeded with a `u64`, so golden values are reproducible.

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numeric::Rational;

/// Seed of the pseudorandom input used by golden-value tests.
pub const GOLDEN_SEED: u64 = 0x5EED_2024;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` uniform bits, 64 per draw, least significant bit first.
pub fn pseudorandom_bits(seed: u64, n: usize) -> Vec<bool> {
    let mut r = rng(seed);
    fill_bits(&mut r, n)
}

pub fn fill_bits(r: &mut impl RngCore, n: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = r.next_u64();
        let take = (n - out.len()).min(64);
        out.extend((0..take).map(|i| (w >> i) & 1 == 1));
    }
    out
}

/// Independent bits that are 1 with probability `floor(p * 2^64) / 2^64`.
pub fn bernoulli_bits(seed: u64, n: usize, p: &Rational) -> Vec<bool> {
    assert!(!p.is_negative() && p <= &Rational::from_integer(1.into()), "p must lie in [0, 1]");
    let scaled = (p * Rational::from_integer((BigUint::from(1u8) << 64u32).into())).floor().to_integer();
    let mut r = rng(seed);
    match scaled.to_u64() {
        Some(threshold) => (0..n).map(|_| r.next_u64() < threshold).collect(),
        None => vec![true; n], // p = 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn deterministic() {
        assert_eq!(pseudorandom_bits(7, 200), pseudorandom_bits(7, 200));
        assert_ne!(pseudorandom_bits(7, 200), pseudorandom_bits(8, 200));
        assert_eq!(pseudorandom_bits(7, 100)[..], pseudorandom_bits(7, 200)[..100]);
    }

    #[test]
    fn bernoulli_extremes_and_rate() {
        assert!(bernoulli_bits(1, 100, &rat(0, 1)).iter().all(|&b| !b));
        assert!(bernoulli_bits(1, 100, &rat(1, 1)).iter().all(|&b| b));
        let ones = bernoulli_bits(3, 1 << 16, &rat(11, 100)).iter().filter(|&&b| b).count();
        assert!((6800..7600).contains(&ones), "{ones}");
    }
}
