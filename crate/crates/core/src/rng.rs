//! Seeding conventions.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! 64-bit seed. Independent replicates use distinct ChaCha *streams* of the
//! same key, so replicate `r` always sees the same numbers no matter which
//! thread runs it or in which order. Nested experiment levels (sweep point,
//! repeat) derive child seeds with [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used when the caller does not provide one.
pub const DEFAULT_SEED: u64 = 0x5EED_0F_5A_11_CE;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for replicate `index` of an ensemble keyed by `seed`.
pub fn replicate_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a path of integer tags below `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(seed), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}
