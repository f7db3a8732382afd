//! Seed derivation and keyed coin flips.
//!
//! Randomised joins are decided by a hash of `(seed, from, to)` rather than by
//! the position of the draw in an RNG sequence, so that two algorithms that
//! visit the same pair in a different order still see the same coin.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent child seed for a named sub-stream of randomness.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(tag.wrapping_mul(0xd6e8_feb8_6659_fd93)))
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform value in `[0, 1)` keyed by an ordered pair.
#[inline]
pub fn coin(seed: u64, from: usize, to: usize) -> f64 {
    let h = splitmix64(
        splitmix64(seed ^ 0x5851_f42d_4c95_7f2d)
            ^ splitmix64((from as u64).wrapping_mul(0x2545_f491_4f6c_dd1d))
            ^ (to as u64).rotate_left(32),
    );
    let h = splitmix64(h ^ to as u64);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `true` with probability `prob` for the keyed pair.
#[inline]
pub fn keyed_bernoulli(seed: u64, from: usize, to: usize, prob: f64) -> bool {
    coin(seed, from, to) < prob
}

// Tags for derive_seed, kept in one place so call sites cannot collide.
pub(crate) const TAG_PERMUTATION: u64 = 1;
pub(crate) const TAG_COINS: u64 = 2;
pub(crate) const TAG_SAMPLERS: u64 = 3;
pub(crate) const TAG_SPARSIFIER: u64 = 4;
pub(crate) const TAG_PREROUND: u64 = 5;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_is_deterministic_and_directional() {
        assert_eq!(coin(7, 1, 2), coin(7, 1, 2));
        assert_ne!(coin(7, 1, 2), coin(7, 2, 1));
        assert_ne!(coin(7, 1, 2), coin(8, 1, 2));
    }

    #[test]
    fn coin_mean_is_near_half() {
        let n = 200_000;
        let mean: f64 = (0..n).map(|i| coin(3, i, i + 1)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }
}
