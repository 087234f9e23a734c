//! Deterministic random substreams.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by the run
//! seed, a domain tag and an index (sample, restart, replicate, ...). Work
//! items can then run in any order or on any number of threads and still
//! produce the same values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Domain tags separating the uses of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    NullSample = 1,
    KMeans = 2,
    Consensus = 3,
    Louvain = 4,
    Multiway = 5,
    Permutation = 6,
    Synthetic = 7,
    Sweep = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    let key = splitmix64(seed ^ splitmix64(domain as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Derives a child seed, used when one seeded task spawns another
/// (a sweep replicate seeding its synthetic network and null model).
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(domain as u64)) ^ splitmix64(index.wrapping_add(1)))
}
