//! Deterministic seed plumbing.
//!
//! Every random choice in the toolkit flows from one master seed. Sub-seeds
//! for independent tasks (per cluster, per fold rotation, per generated
//! player, ...) are derived here so that results never depend on execution
//! order or thread scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; a cheap, well-mixed 64-bit permutation.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed and a list of salts.
///
/// Same master + same salts -> same sub-seed; distinct salt paths give
/// independent streams.
pub fn derive_seed(master: u64, salts: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &salt in salts {
        state = splitmix64(state ^ salt.wrapping_mul(0xA076_1D64_78BD_642F));
    }
    state
}

/// A seeded deterministic generator. All randomness in the toolkit goes
/// through this so runs are reproducible bit for bit.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
