//! Deterministic randomness for simulation.
//!
//! Every random choice in the toolkit (device inputs, outcomes, lifting
//! permutations, shuffles, key material for tests) flows through [`SimRng`].
//! It is a seeded ChaCha stream: reproducible, but a simulation stand-in for
//! the hardware random number generators a deployment would use.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The single seedable generator type used across the crate.
pub type SimRng = ChaCha12Rng;

/// Creates a generator from a 64-bit seed.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Derives an independent child seed from a parent seed and a label.
///
/// Used to split one user-facing `--seed` into separate streams (Alice, Bob,
/// device, code construction) without the streams overlapping.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with splitmix64 of the seed.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
