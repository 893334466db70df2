//! Seedable per-drop random streams.
//!
//! Every stream is a ChaCha12 keystream keyed by the campaign seed and
//! addressed by a 64-bit stream id, so a drop's samples depend only on
//! `(seed, stream_id)` and never on which worker thread evaluates it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Result, SimError};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform sample on `[lo, hi)`. A degenerate interval returns `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo <= hi) {
            return Err(SimError::arg(format!("uniform bounds out of order: lo={lo}, hi={hi}")));
        }
        if lo == hi {
            return Ok(lo);
        }
        Ok(self.inner.random_range(lo..hi))
    }

    /// Uniform sample on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform integer on the closed range `[lo, hi]`.
    pub fn uniform_int(&mut self, lo: u32, hi: u32) -> Result<u32> {
        if lo > hi {
            return Err(SimError::arg(format!("integer bounds out of order: lo={lo}, hi={hi}")));
        }
        Ok(self.inner.random_range(lo..=hi))
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal(&mut self, mean: f64, sigma: f64) -> Result<f64> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SimError::arg(format!("standard deviation must be >= 0, got {sigma}")));
        }
        Ok(mean + sigma * self.standard_normal())
    }

    pub fn poisson(&mut self, mean: f64) -> Result<u32> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(SimError::arg(format!("Poisson mean must be > 0, got {mean}")));
        }
        let dist = Poisson::new(mean).map_err(|e| SimError::arg(e.to_string()))?;
        Ok(dist.sample(&mut self.inner) as u32)
    }

    pub fn bernoulli(&mut self, p: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(SimError::arg(format!("probability must lie in [0, 1], got {p}")));
        }
        Ok(self.unit() < p)
    }

    /// Uniform phase on `[0, 2π)`.
    pub fn phase(&mut self) -> f64 {
        self.unit() * std::f64::consts::TAU
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.inner.random_range(0..=i);
            items.swap(i, j);
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
