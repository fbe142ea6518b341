//! The seeded generator shared by the reference engines and the SimScript interpreter.
//!
//! Both consume the same stream: ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! one 64-bit output per draw. A draw is converted to a unit value in `[0, 1)` with
//! `(x >> 11) * 2^-53`. The samplers built on top are:
//!
//! * `uniform(low, high)     = low + (high - low) * u`
//! * `uniform_int(low, high) = low + floor(u * (high - low + 1))`, capped at `high`
//! * `exponential(mean)      = -mean * ln(1 - u)`

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{DistributionKind, DistributionSpec};

const UNIT_SCALE: f64 = 1.0 / (1u64 << 53) as f64;

/// Convert one raw generator output to a unit value in `[0, 1)`.
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * UNIT_SCALE
}

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    /// Number of raw outputs consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_unit(&mut self) -> f64 {
        self.draws += 1;
        unit_from_bits(self.inner.next_u64())
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        let u = self.next_unit();
        low + (high - low) * u
    }

    pub fn uniform_int(&mut self, low: f64, high: f64) -> f64 {
        let u = self.next_unit();
        (low + (u * (high - low + 1.0)).floor()).min(high)
    }

    pub fn exponential(&mut self, mean: f64) -> f64 {
        let u = self.next_unit();
        -mean * (1.0 - u).ln()
    }

    /// Sample a distribution. Constants consume no draw.
    pub fn sample(&mut self, dist: &DistributionSpec) -> f64 {
        match dist.kind {
            DistributionKind::Constant => dist.params[0],
            DistributionKind::UniformInt => self.uniform_int(dist.params[0], dist.params[1]),
            DistributionKind::UniformReal => self.uniform(dist.params[0], dist.params[1]),
            DistributionKind::Exponential => self.exponential(dist.params[0]),
        }
    }
}
