//! Deterministic RNG stream derivation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Derive an independent, reproducible RNG stream from a master seed and two
/// stream labels (e.g. grid index and replicate index).
///
/// Distinct label triples yield unrelated streams, so parallel sweeps can
/// hand each (candidate, replicate) pair its own stream without the schedule
/// affecting results.
pub fn derive_rng(master_seed: u64, stream: u64, substream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&substream.to_le_bytes());
    seed[24..32].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}
