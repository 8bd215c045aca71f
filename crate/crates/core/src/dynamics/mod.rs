//! Finite-N interacting Brownian motions.
//!
//! The infinite Ginibre system has drift `Σ_j (x_i - x_j)/|x_i - x_j|²` and no
//! external field. At finite N we add the confinement `-x_i`; the drift is then
//! `½∇ log p` for `p ∝ Π|z_i - z_j|² e^{-Σ|z_i|²}`, so the finite-N Ginibre
//! eigenvalue law is exactly invariant. Free Brownian motion and gradient
//! dynamics of a smooth pair potential serve as diffusive baselines.

mod drift;
mod integrator;

pub use drift::{coulomb_drift, drift, DriftKind, DriftSpec, COLLISION_DISTANCE};
pub use integrator::{em_step, EulerMaruyama, SdeState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{label_radial, Configuration, Point};
use crate::scalar::Real;

/// Label of the tagged particle: the one closest to the origin at `t = 0`.
pub const TAGGED: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationParams<T> {
    pub t_max: T,
    pub dt: T,
    /// Store every `thin`-th step.
    pub thin: usize,
    pub seed: u64,
    pub noise: T,
    pub parallel: bool,
}

impl<T: Real> SimulationParams<T> {
    pub fn new(t_max: T, dt: T, thin: usize, seed: u64) -> Self {
        Self { t_max, dt, thin, seed, noise: T::one(), parallel: false }
    }

    /// Number of steps, `round(t_max / dt)`.
    pub fn n_steps(&self) -> u64 {
        (self.t_max / self.dt).round().to_u64().unwrap_or(0)
    }
}

/// Run metadata persisted next to a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub scheme: String,
    pub drift: DriftSpec<f64>,
    pub dt: f64,
    pub t_max: f64,
    pub thin: usize,
    pub seed: u64,
    pub noise: f64,
    pub n_particles: usize,
    pub steps_taken: u64,
    pub capped_steps: u64,
    pub particle_steps: u64,
    pub min_pair_distance: Option<f64>,
    pub complete: bool,
    pub abort_reason: Option<String>,
}

impl TrajectoryMeta {
    /// Fraction of particle-steps whose drift was capped.
    pub fn capped_fraction(&self) -> f64 {
        if self.particle_steps == 0 {
            0.0
        } else {
            self.capped_steps as f64 / self.particle_steps as f64
        }
    }
}

/// Labelled paths sampled on a common time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub frames: Vec<Vec<Point<T>>>,
    pub meta: TrajectoryMeta,
}

impl<T: Real> Trajectory<T> {
    pub fn n_particles(&self) -> usize {
        self.frames.first().map_or(0, |f| f.len())
    }

    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Path of one particle across all frames.
    pub fn path(&self, particle: usize) -> Result<Vec<Point<T>>> {
        let n = self.n_particles();
        if particle >= n {
            return Err(Error::IndexOutOfRange { index: particle, len: n });
        }
        Ok(self.frames.iter().map(|f| f[particle]).collect())
    }

    /// Equal particle counts and strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.frames.len() {
            return Err(Error::InvalidArgument("times and frames differ in length".into()));
        }
        let n = self.n_particles();
        if self.frames.iter().any(|f| f.len() != n) {
            return Err(Error::InvalidArgument("frames have unequal particle counts".into()));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("frame times must increase strictly".into()));
        }
        Ok(())
    }
}

/// Cause of an aborted run, with the metadata up to the failing step.
#[derive(Debug)]
pub struct RunFailure {
    pub meta: TrajectoryMeta,
    pub cause: Error,
}

/// An aborted [`simulate`] call: the frames stored before the failure.
#[derive(Debug)]
pub struct SimulationAbort<T> {
    pub partial: Trajectory<T>,
    pub cause: Error,
}

impl<T: Real> std::fmt::Display for SimulationAbort<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "simulation aborted after {} steps: {}", self.partial.meta.steps_taken, self.cause)
    }
}

impl<T: Real> std::error::Error for SimulationAbort<T> {}

fn meta_for<T: Real>(spec: &DriftSpec<T>, p: &SimulationParams<T>, n: usize) -> TrajectoryMeta {
    TrajectoryMeta {
        scheme: "euler_maruyama".into(),
        drift: spec.cast(),
        dt: p.dt.to_f64_lossy(),
        t_max: p.t_max.to_f64_lossy(),
        thin: p.thin,
        seed: p.seed,
        noise: p.noise.to_f64_lossy(),
        n_particles: n,
        steps_taken: 0,
        capped_steps: 0,
        particle_steps: 0,
        min_pair_distance: None,
        complete: false,
        abort_reason: None,
    }
}

/// Integrates from `config0`, calling `on_frame(t, positions)` at every
/// stored frame (`t = 0, thin·dt, ...`).
///
/// Particles are labelled once by [`label_radial`] at `t = 0`.
pub fn simulate_with<T: Real, F: FnMut(T, &[Point<T>])>(
    config0: &Configuration<T>,
    spec: &DriftSpec<T>,
    params: &SimulationParams<T>,
    mut on_frame: F,
) -> std::result::Result<TrajectoryMeta, RunFailure> {
    let n = config0.len();
    let mut meta = meta_for(spec, params, n);
    let scheme = EulerMaruyama { dt: params.dt, noise: params.noise, parallel: params.parallel };
    let checks = scheme.validate().and_then(|_| spec.validate()).and_then(|_| {
        if params.thin == 0 || !(params.t_max > T::zero()) || params.n_steps() == 0 {
            Err(Error::InvalidArgument("need t_max >= dt > 0 and thin >= 1".into()))
        } else {
            Ok(())
        }
    });
    if let Err(cause) = checks {
        meta.abort_reason = Some(cause.to_string());
        return Err(RunFailure { meta, cause });
    }
    let mut state = SdeState::new(label_radial(config0), params.seed);
    let mut buf = Vec::with_capacity(n);
    on_frame(T::zero(), &state.positions);
    let n_steps = params.n_steps();
    for k in 1..=n_steps {
        if let Err(cause) = scheme.step(&mut state, spec, &mut buf) {
            meta.steps_taken = state.step;
            meta.capped_steps = state.capped;
            meta.particle_steps = state.step * n as u64;
            meta.min_pair_distance = state.min_pair_distance.map(|d| d.to_f64_lossy());
            meta.abort_reason = Some(cause.to_string());
            return Err(RunFailure { meta, cause });
        }
        // exact grid times, no accumulated rounding
        state.time = T::from_u64(k).expect("step count representable") * params.dt;
        if k % params.thin as u64 == 0 {
            on_frame(state.time, &state.positions);
        }
    }
    meta.steps_taken = state.step;
    meta.capped_steps = state.capped;
    meta.particle_steps = state.step * n as u64;
    meta.min_pair_distance = state.min_pair_distance.map(|d| d.to_f64_lossy());
    meta.complete = true;
    Ok(meta)
}

/// [`simulate_with`] collecting every stored frame.
pub fn simulate<T: Real>(
    config0: &Configuration<T>,
    spec: &DriftSpec<T>,
    params: &SimulationParams<T>,
) -> std::result::Result<Trajectory<T>, Box<SimulationAbort<T>>> {
    let mut times = Vec::new();
    let mut frames = Vec::new();
    let out = simulate_with(config0, spec, params, |t, x| {
        times.push(t);
        frames.push(x.to_vec());
    });
    match out {
        Ok(meta) => Ok(Trajectory { times, frames, meta }),
        Err(RunFailure { meta, cause }) => {
            Err(Box::new(SimulationAbort { partial: Trajectory { times, frames, meta }, cause }))
        }
    }
}

/// Tagged path plus the environment seen from it.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentPaths<T> {
    pub tagged: Vec<Point<T>>,
    /// `Y^i_t = X^{σ(i)}_t - X^{tagged}_t`, all other particles in label order.
    pub environment: Trajectory<T>,
}

pub fn environment_paths<T: Real>(traj: &Trajectory<T>, tagged: usize) -> Result<EnvironmentPaths<T>> {
    let n = traj.n_particles();
    if n < 2 {
        return Err(Error::InvalidArgument("environment needs at least two particles".into()));
    }
    let path = traj.path(tagged)?;
    let frames = traj
        .frames
        .iter()
        .zip(&path)
        .map(|(f, &x)| f.iter().enumerate().filter(|&(j, _)| j != tagged).map(|(_, &y)| y - x).collect())
        .collect();
    let mut meta = traj.meta.clone();
    meta.n_particles = n - 1;
    Ok(EnvironmentPaths { tagged: path, environment: Trajectory { times: traj.times.clone(), frames, meta } })
}
