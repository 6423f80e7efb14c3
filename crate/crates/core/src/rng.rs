//! Seed plumbing. Every random decision in the crate draws from a ChaCha8
//! stream whose seed is derived deterministically from the user seed and a
//! short "path" of stream labels, so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `seed` and a stream label.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    mix64(seed ^ mix64(label.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Seed of a tree node's child; `bit` is 0 for left and 1 for right.
pub fn child_seed(node_seed: u64, bit: u8) -> u64 {
    derive_seed(node_seed, 0x5eed_0000 + bit as u64)
}

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_differ_from_parent_and_each_other() {
        let s = 42;
        let l = child_seed(s, 0);
        let r = child_seed(s, 1);
        assert_ne!(l, r);
        assert_ne!(l, s);
        assert_eq!(l, child_seed(42, 0));
    }
}
