//! Seeding contract for every stochastic routine.
//!
//! All sampling goes through [`SimRng`], a ChaCha20 stream cipher generator
//! seeded from a 64-bit value. Independent trials obtain their own generator
//! through [`derive_seed`], so results depend only on the base seed and the
//! trial index, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer applied to `base + (index + 1) * golden_gamma`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(base: u64, index: u64) -> SimRng {
    seeded(derive_seed(base, index))
}
