//! Deterministic sampling helpers. Every stochastic routine in this crate
//! threads a `u64` seed through [`SeededRng`] so that identical
//! configurations produce identical outputs.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ChaCha-backed RNG with the complex-valued draws used across the crate.
pub struct SeededRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        loop {
            let u: f64 = self.inner.gen::<f64>();
            if u <= f64::MIN_POSITIVE {
                continue;
            }
            let v: f64 = self.inner.gen::<f64>();
            let r = (-2.0 * u.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * v;
            self.spare = Some(r * theta.sin());
            return r * theta.cos();
        }
    }

    /// Complex standard normal (unit variance overall).
    pub fn complex_gaussian(&mut self) -> Complex64 {
        Complex64::new(self.gaussian(), self.gaussian()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform point on the complex unit sphere in C^dim.
    pub fn unit_vector(&mut self, dim: usize) -> Vec<Complex64> {
        loop {
            let mut v: Vec<Complex64> = (0..dim).map(|_| self.complex_gaussian()).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                for z in v.iter_mut() {
                    *z /= norm;
                }
                return v;
            }
        }
    }
}
