//! Seeded randomness shared by the samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for stream `ordinal` of `master` (splitmix64).
pub fn derive_seed(master: u64, ordinal: u64) -> u64 {
    let mut z = master ^ ordinal.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws an index from unnormalized non-negative `weights` restricted to
/// `candidates`, walking them in the given order.
pub(crate) fn draw<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], candidates: &[u32]) -> u32 {
    let total: f64 = candidates.iter().map(|&i| weights[i as usize]).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = candidates[0];
    for &i in candidates {
        let w = weights[i as usize];
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}
