//! Labeled, independent random streams derived from one run seed.
//!
//! Every subsystem draws from its own stream so that changing how much one
//! subsystem consumes never shifts the draws seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Mixes a seed, a label and a list of integer keys into a 64-bit stream seed.
pub fn derive_seed(seed: u64, label: &str, keys: &[u64]) -> u64 {
    let mut h = splitmix64(seed ^ fnv1a(label));
    for &k in keys {
        h = splitmix64(h ^ k);
    }
    h
}

/// Random stream for `label`, further keyed by `keys`.
pub fn stream(seed: u64, label: &str, keys: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, label, keys))
}

/// Plain seeded stream, mostly for tests.
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
