//! Deterministic random streams.
//!
//! Every sampler in the crate draws from a child stream derived from the
//! master seed and a stable purpose label. Adding a new sampler with a new
//! label never perturbs the draws of existing ones, and scan points can be
//! evaluated in parallel while staying bit-identical to a sequential run.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use sha2::{Digest, Sha256};

/// Child generator keyed by `(seed, label)`.
pub fn derive_rng(seed: u64, label: &str) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Child generator keyed by `(seed, label, index)`, for per-point streams.
pub fn derive_rng_indexed(seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update([0u8]);
    hasher.update(label.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Binomial draw that tolerates the degenerate probabilities 0 and 1.
pub fn sample_binomial<R: Rng>(rng: &mut R, n: u64, p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("p checked to lie in (0,1)").sample(rng)
}
