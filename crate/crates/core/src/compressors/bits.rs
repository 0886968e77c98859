//! Bit-cost formulas and the per-round lower bound for unbiased compressors.

use num_bigint::BigUint;

/// `⌈log₂ C(d, s)⌉`, computed exactly.
pub fn ceil_log2_binomial(d: usize, s: usize) -> u64 {
    assert!(s <= d, "s must not exceed d");
    let s = s.min(d - s);
    let mut acc = BigUint::from(1u32);
    for k in 0..s {
        acc *= BigUint::from(d - k);
        acc /= BigUint::from(k + 1);
    }
    ceil_log2(&acc)
}

fn ceil_log2(v: &BigUint) -> u64 {
    let bits = v.bits();
    if bits == 0 {
        return 0;
    }
    let is_pow2 = v.trailing_zeros() == Some(bits - 1);
    if is_pow2 {
        bits - 1
    } else {
        bits
    }
}

/// Bits of one random-`s` message: `r·s + ⌈log₂ C(d, s)⌉`.
pub fn random_s_bits(d: usize, s: usize, r: u32) -> u64 {
    u64::from(r) * s as u64 + ceil_log2_binomial(d, s)
}

/// Minimum bits per message for any `ω`-unbiased compressor on `d` entries of `r` bits:
/// `r·d` when `ω ≤ 1/(4^r − 1)`, otherwise `d·log₄(1 + 1/ω)`.
pub fn min_bits_lower_bound(d: usize, omega: f64, r: u32) -> f64 {
    let threshold = 1.0 / (4f64.powi(r as i32) - 1.0);
    if omega <= threshold {
        f64::from(r) * d as f64
    } else {
        d as f64 * (1.0 + 1.0 / omega).ln() / 4f64.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_logs() {
        assert_eq!(ceil_log2_binomial(20, 1), 5);
        assert_eq!(ceil_log2_binomial(16, 1), 4);
        assert_eq!(ceil_log2_binomial(20, 20), 0);
        assert_eq!(ceil_log2_binomial(4, 2), 3); // C(4,2) = 6
        assert_eq!(ceil_log2_binomial(8, 4), 7); // 70
        assert_eq!(ceil_log2_binomial(300, 15), 83);
    }

    #[test]
    fn random_s_cost() {
        assert_eq!(random_s_bits(20, 1, 64), 69);
        assert_eq!(random_s_bits(20, 20, 64), 1280);
    }

    #[test]
    fn lower_bound_branches() {
        assert_eq!(min_bits_lower_bound(20, 0.0, 64), 1280.0);
        let v = min_bits_lower_bound(20, 19.0, 64);
        assert!((v - 0.740_005_814_437_767_8).abs() < 1e-9, "{v}");
        // tiny omega below the 4^-r threshold with r = 1
        assert_eq!(min_bits_lower_bound(10, 0.3, 1), 10.0);
    }
}
