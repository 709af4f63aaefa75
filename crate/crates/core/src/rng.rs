//! Reproducible starting points.
//!
//! Draws come from ChaCha8 seeded with `seed_from_u64(seed)`; each coordinate
//! is `(next_u64() >> 11) * 2^-53`, uniform on `[0, 1)`. Any ChaCha8
//! implementation with the same seeding rule reproduces the vectors.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded stream of uniform `[0, 1)` doubles.
#[derive(Debug, Clone)]
pub struct UniformStream {
    rng: ChaCha8Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        UniformStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.next_in(lo, hi)).collect()
    }
}

/// Nonnegative random start, uniform on `[0, 1)^n`.
pub fn uniform_start(n: usize, seed: u64) -> Vec<f64> {
    UniformStream::new(seed).vector(n, 0.0, 1.0)
}
