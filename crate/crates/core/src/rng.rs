//! Seed splitting and counter-addressed Gaussian noise.
//!
//! Brownian increments are addressed by `(seed, step, particle, coordinate)`:
//! the ChaCha key is derived from the seed, the stream id is the step index and
//! the word position is fixed by the particle index. Any thread can therefore
//! regenerate the draws for any particle without touching shared state, and a
//! trajectory does not depend on how the force loop was scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32-bit words consumed per particle per step (two `u64` draws).
const WORDS_PER_PARTICLE: u128 = 4;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives the seed of replica `k` from a base seed: `mix64(mix64(base) ^ mix64(k + φ))`.
///
/// Every replica can be replayed from its split seed alone.
pub fn split_seed(base: u64, k: u64) -> u64 {
    mix64(mix64(base) ^ mix64(k.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// General purpose generator for samplers (matrix entries, MCMC proposals).
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[inline]
fn open_unit(bits: u64) -> f64 {
    // (0, 1]
    ((bits >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn half_open_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard 2-d Gaussian draws for one integration step.
#[derive(Clone, Debug)]
pub struct StepNoise {
    rng: ChaCha8Rng,
}

impl StepNoise {
    /// Positions the stream at the draws of `first_particle` in step `step`.
    pub fn new(seed: u64, step: u64, first_particle: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(step);
        rng.set_word_pos(first_particle as u128 * WORDS_PER_PARTICLE);
        Self { rng }
    }

    /// Next particle's pair of independent N(0, 1) coordinates (Box-Muller).
    #[inline]
    pub fn next_pair(&mut self) -> (f64, f64) {
        let u1 = open_unit(self.rng.next_u64());
        let u2 = half_open_unit(self.rng.next_u64());
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (r * c, r * s)
    }
}
