use rayon::prelude::*;

use super::drift::{check_collision, interaction, DriftKind, DriftSpec};
use crate::error::{Error, Result};
use crate::model::Point;
use crate::rng::StepNoise;
use crate::scalar::Real;

/// Particles per work unit of the parallel force loop; also the granularity
/// at which the noise stream is re-seeked.
const CHUNK: usize = 64;

/// Labelled positions plus the counters that make a step reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeState<T> {
    pub positions: Vec<Point<T>>,
    pub time: T,
    /// Steps taken so far; also the noise stream id of the next step.
    pub step: u64,
    /// Noise key.
    pub seed: u64,
    /// Particle-steps whose drift was capped at `1/√dt`.
    pub capped: u64,
    /// Smallest pair distance met by an interacting drift, if any.
    pub min_pair_distance: Option<T>,
}

impl<T: Real> SdeState<T> {
    pub fn new(positions: Vec<Point<T>>, seed: u64) -> Self {
        Self { positions, time: T::zero(), step: 0, seed, capped: 0, min_pair_distance: None }
    }
}

/// Euler-Maruyama `X <- X + b(X) dt + σ √dt ξ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerMaruyama<T> {
    pub dt: T,
    /// Noise amplitude `σ`; 1 for the standard dynamics, 0 for the drift flow.
    pub noise: T,
    /// Evaluate drifts and increments on the rayon pool.
    pub parallel: bool,
}

impl<T: Real> EulerMaruyama<T> {
    pub fn new(dt: T) -> Self {
        Self { dt, noise: T::one(), parallel: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidArgument(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.noise >= T::zero()) {
            return Err(Error::InvalidArgument("noise amplitude must be >= 0".into()));
        }
        Ok(())
    }

    /// Advances `state` by one step, reusing `drift_buf` for the drifts.
    pub fn step(&self, state: &mut SdeState<T>, spec: &DriftSpec<T>, drift_buf: &mut Vec<Point<T>>) -> Result<()> {
        let n = state.positions.len();
        drift_buf.resize(n, Point::origin());
        let cap = T::one() / self.dt.sqrt();
        let cap2 = cap * cap;
        let interacting = spec.kind != DriftKind::Free;
        let positions = &state.positions;

        // phase 1: drifts from the old positions
        let eval = |start: usize, out: &mut [Point<T>]| -> (T, usize, u64) {
            let (mut best, mut arg, mut capped) = (T::infinity(), start, 0u64);
            for (k, b) in out.iter_mut().enumerate() {
                let i = start + k;
                let (inter, min_r2) = interaction(positions, i, spec);
                if min_r2 < best {
                    best = min_r2;
                    arg = i;
                }
                let mut v = inter - positions[i] * spec.confinement;
                let m2 = v.norm_sqr();
                if m2 > cap2 {
                    v = v * (cap / m2.sqrt());
                    capped += 1;
                }
                *b = v;
            }
            (best, arg, capped)
        };
        let chunk_stats: Vec<(T, usize, u64)> = if self.parallel {
            drift_buf.par_chunks_mut(CHUNK).enumerate().map(|(c, out)| eval(c * CHUNK, out)).collect()
        } else {
            drift_buf.chunks_mut(CHUNK).enumerate().map(|(c, out)| eval(c * CHUNK, out)).collect()
        };
        let (mut min_r2, mut arg, mut capped) = (T::infinity(), 0, 0u64);
        for (m, a, c) in chunk_stats {
            if m < min_r2 {
                min_r2 = m;
                arg = a;
            }
            capped += c;
        }
        if spec.kind == DriftKind::CoulombConfined {
            check_collision(arg, min_r2)?;
        }

        // phase 2: increments
        let (dt, sqrt_dt, sigma, seed, step) = (self.dt, self.dt.sqrt(), self.noise, state.seed, state.step);
        let advance = |start: usize, xs: &mut [Point<T>], bs: &[Point<T>]| {
            let mut noise = StepNoise::new(seed, step, start);
            for (x, b) in xs.iter_mut().zip(bs) {
                let (gx, gy) = noise.next_pair();
                let xi = Point::new(T::lit(gx), T::lit(gy));
                *x = *x + *b * dt + xi * (sigma * sqrt_dt);
            }
        };
        if self.parallel {
            state
                .positions
                .par_chunks_mut(CHUNK)
                .zip(drift_buf.par_chunks(CHUNK))
                .enumerate()
                .for_each(|(c, (xs, bs))| advance(c * CHUNK, xs, bs));
        } else {
            state
                .positions
                .chunks_mut(CHUNK)
                .zip(drift_buf.chunks(CHUNK))
                .enumerate()
                .for_each(|(c, (xs, bs))| advance(c * CHUNK, xs, bs));
        }
        if let Some(bad) = state.positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                re: state.positions[bad].re.to_f64_lossy(),
                im: state.positions[bad].im.to_f64_lossy(),
            });
        }

        state.step += 1;
        state.time = state.time + self.dt;
        state.capped += capped;
        if interacting && n > 1 {
            let d = min_r2.sqrt();
            state.min_pair_distance = Some(state.min_pair_distance.map_or(d, |m| m.min(d)));
        }
        Ok(())
    }
}

/// One Euler-Maruyama step with unit noise, serial force loop.
pub fn em_step<T: Real>(state: &SdeState<T>, spec: &DriftSpec<T>, dt: T) -> Result<SdeState<T>> {
    let scheme = EulerMaruyama::new(dt);
    scheme.validate()?;
    spec.validate()?;
    let mut next = state.clone();
    scheme.step(&mut next, spec, &mut Vec::new())?;
    Ok(next)
}
