//! Per-replicate random streams.
//!
//! Replicate `i` of a run seeded with `seed` always reads from ChaCha8 stream
//! `i` under key `seed`, so replicates are independent of each other and of
//! the order (or thread) in which they are generated.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use alloc::vec::Vec;

pub type ReplicateRng = ChaCha8Rng;

pub fn replicate_rng(seed: u64, replicate: u64) -> ReplicateRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// `len` i.i.d. standard normal draws.
pub fn standard_normals(rng: &mut ReplicateRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
