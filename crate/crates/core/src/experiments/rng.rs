//! Seeded sample streams.
//!
//! Every stream is a xoshiro256++ generator whose 256-bit state is expanded
//! from a single 64-bit word by SplitMix64. The word is derived from
//! `(seed, stream_id)`, so each disturbance level of an experiment draws
//! from its own stream and levels can run in any order or in parallel.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

/// 2^-53, the spacing of the uniform grid in `[0, 1)`.
const UNIT_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Identifies one independent stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A 64-bit word unique to this `(seed, stream_id)` pair, also usable as
    /// a seed for other seeded components.
    pub fn derived_seed(&self) -> u64 {
        mix64(mix64(self.seed) ^ self.stream_id.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn stream(&self) -> SampleStream {
        SampleStream {
            rng: Xoshiro256PlusPlus::seed_from_u64(self.derived_seed()),
        }
    }
}

pub struct SampleStream {
    rng: Xoshiro256PlusPlus,
}

impl SampleStream {
    /// Uniform in `[0, 1)` from the top 53 bits of one draw.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * UNIT_53
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo < hi);
        lo + (hi - lo) * self.unit()
    }

    /// Uniform in `(0, hi)`: an exact zero is resampled.
    pub fn uniform_positive(&mut self, hi: f64) -> f64 {
        loop {
            let u = self.unit();
            if u > 0.0 {
                return hi * u;
            }
        }
    }

    /// Normal(0, sigma) by Box–Muller. Always consumes exactly two draws,
    /// whatever `sigma` is.
    pub fn gaussian(&mut self, sigma: f64) -> f64 {
        let u1 = 1.0 - self.unit(); // (0, 1]
        let u2 = self.unit();
        if sigma == 0.0 {
            return 0.0;
        }
        sigma * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Free-function forms matching the experiment descriptions.
pub fn gaussian_draw(stream: &mut SampleStream, sigma: f64) -> f64 {
    stream.gaussian(sigma)
}

pub fn uniform_draw(stream: &mut SampleStream, lo: f64, hi: f64) -> f64 {
    stream.uniform(lo, hi)
}
