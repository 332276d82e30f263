//! Seed derivation. Every independent unit of work (a bootstrap replicate, a
//! Monte Carlo run) gets its own ChaCha stream keyed by the user seed and a
//! domain tag, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub(crate) const DOMAIN_BOOTSTRAP: u64 = 0x6273_7472_6170;
pub(crate) const DOMAIN_SIMULATION: u64 = 0x7369_6d75_6c61;

/// The generator for unit `index` of `domain` under `seed`.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    let mut rng = ChaCha12Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Seed handed to a child computation (e.g. the bootstrap inside Monte Carlo run `index`).
pub fn child_seed(seed: u64, domain: u64, index: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, domain, index).next_u64()
}
