use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{Factored, Rational};

/// `floor(log2(a / b))` for positive integers, exact.
pub fn floor_log2_ratio(a: &BigUint, b: &BigUint) -> i64 {
    assert!(!a.is_zero() && !b.is_zero());
    let mut t = a.bits() as i64 - b.bits() as i64;
    // compare a against b * 2^t
    let below = if t >= 0 {
        a < &(b << t as u64)
    } else {
        &(a << (-t) as u64) < b
    };
    if below {
        t -= 1;
    }
    t
}

/// Rigorous enclosure `lo <= log2(n) <= hi` with `hi - lo <= 2^{-frac_bits}`.
///
/// The integer part comes from the bit length; the fractional bits come from
/// repeated squaring of the normalized mantissa, run once rounding down and
/// once rounding up.
pub fn log2_bounds(n: &BigUint, frac_bits: u32) -> (Rational, Rational) {
    assert!(!n.is_zero(), "log2 of zero");
    let bl = n.bits();
    let e = bl - 1;
    let int_part = Rational::from_integer(e.into());
    if n.trailing_zeros() == Some(e) {
        return (int_part.clone(), int_part);
    }
    let width = frac_bits as u64 + 64;
    let (m_lo, m_hi) = if bl >= width {
        let lo = n >> (bl - width);
        let exact = n.trailing_zeros().unwrap_or(0) >= bl - width;
        let hi = if exact { lo.clone() } else { &lo + 1u32 };
        (lo, hi)
    } else {
        let m = n << (width - bl);
        (m.clone(), m)
    };
    let f_lo = fractional_bits(m_lo, width, frac_bits, false);
    let f_hi = fractional_bits(m_hi, width, frac_bits, true);
    let denom = BigUint::one() << frac_bits as u64;
    let lo = int_part.clone() + super::rat_from_uint(f_lo.clone(), denom.clone());
    let hi = int_part + super::rat_from_uint(f_hi + 1u32, denom);
    (lo, hi)
}

/// Enclosure of `log2(odd * 2^twos)`.
pub fn log2_bounds_factored(f: &Factored, frac_bits: u32) -> (Rational, Rational) {
    let twos = Rational::from_integer(f.twos.clone().into());
    let (lo, hi) = log2_bounds(&f.odd, frac_bits);
    (lo + &twos, hi + twos)
}

// `m / 2^{width-1}` is the mantissa in [1, 2]; returns the first `frac_bits`
// bits of its logarithm as an integer.
fn fractional_bits(mut m: BigUint, width: u64, frac_bits: u32, round_up: bool) -> BigUint {
    let two = BigUint::one() << width; // mantissa value 2 at scale 2^{width-1}
    let mut bits = BigUint::zero();
    for _ in 0..frac_bits {
        let sq = &m * &m; // scale 2^{2(width-1)}
        let ge_two = sq >= (&two << (width - 1));
        let shift = if ge_two { width } else { width - 1 };
        let mut next = &sq >> shift;
        if round_up && (&next << shift) != sq {
            next += 1u32;
        }
        bits <<= 1u8;
        if ge_two {
            bits += 1u32;
        }
        m = next;
    }
    bits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, to_f64};

    #[test]
    fn ratio_floor() {
        let b = |x: u64| BigUint::from(x);
        assert_eq!(floor_log2_ratio(&b(24), &b(5)), 2);
        assert_eq!(floor_log2_ratio(&b(8), &b(1)), 3);
        assert_eq!(floor_log2_ratio(&b(1), &b(3)), -2);
        assert_eq!(floor_log2_ratio(&b(1), &b(2)), -1);
    }

    #[test]
    fn bounds_enclose_float_log() {
        for n in [3u64, 5, 10, 12345, 999_999_937, u64::MAX] {
            let (lo, hi) = log2_bounds(&BigUint::from(n), 40);
            let f = (n as f64).log2();
            assert!(to_f64(&lo) <= f + 1e-9 && f - 1e-9 <= to_f64(&hi), "{n}");
            assert!(hi.clone() - lo.clone() <= rat(1, 1 << 40));
        }
    }

    #[test]
    fn bounds_exact_for_powers_of_two() {
        let (lo, hi) = log2_bounds(&(BigUint::one() << 1000u32), 30);
        assert_eq!(lo, rat(1000, 1));
        assert_eq!(hi, lo);
    }

    #[test]
    fn bounds_are_rigorous_against_exact_powers() {
        // log2(3) in [lo, hi] iff 2^lo <= 3 <= 2^hi; check via 3^(2^f) vs 2^(lo*2^f).
        let f = 12u32;
        let (lo, hi) = log2_bounds(&BigUint::from(3u32), f);
        let scale = 1u64 << f;
        let three_pow = BigUint::from(3u32).pow(scale as u32);
        let lo_num = (lo * Rational::from_integer(scale.into())).to_integer();
        let hi_num = (hi * Rational::from_integer(scale.into())).ceil().to_integer();
        let lo_e: u64 = lo_num.try_into().unwrap();
        let hi_e: u64 = hi_num.try_into().unwrap();
        assert!(BigUint::one() << lo_e <= three_pow);
        assert!(three_pow <= BigUint::one() << hi_e);
    }
}
