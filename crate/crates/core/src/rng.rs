//! Seeded randomness.
//!
//! All stochastic steps draw from [`Rng`], a thin wrapper around Marsaglia's
//! xorshift128 generator (`rand_xorshift::XorShiftRng`). The seed is expanded
//! with `SeedableRng::seed_from_u64`, which is specified bit-for-bit by
//! `rand_core`, so a given seed yields the same stream on every platform.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xorshift::XorShiftRng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: XorShiftRng,
}

impl Rng {
    pub const ALGORITHM: &'static str = "xorshift128";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: XorShiftRng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a named purpose, derived from `seed` and `tag`.
    pub fn derive(seed: u64, tag: &str) -> Self {
        let mut h = Sha256::new();
        h.update(seed.to_le_bytes());
        h.update(tag.as_bytes());
        let digest = h.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        Self::new(u64::from_le_bytes(bytes))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n`. Panics when `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// A uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "permutation length must be at least 1".into(),
        ));
    }
    let mut p: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut p);
    Ok(p)
}
