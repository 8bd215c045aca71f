//! Finite-N simulation and analysis of planar log-gas Brownian dynamics.
//!
//! The crate samples the Ginibre, Poisson and Gibbs point fields, evaluates
//! Ginibre correlation determinants and reduced Palm densities exactly,
//! integrates the Coulomb-interacting Brownian system with Gaussian
//! confinement, and estimates the statistics that separate sub-diffusive
//! (Ginibre) from diffusive (Poisson, Gibbs) tagged-particle motion.
//!
//! Geometry, kernels, drifts and estimators are generic over [`Real`]
//! (`f32`, `f64`). Samplers and file formats work in `f64`; the aliases below
//! name the common concrete types.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod palm;
pub mod pointfield;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Point64 = model::Point<f64>;
pub type Point32 = model::Point<f32>;
pub type Window64 = model::Window<f64>;
pub type Configuration64 = model::Configuration<f64>;
pub type Configuration32 = model::Configuration<f32>;
pub type Trajectory64 = dynamics::Trajectory<f64>;
pub type Trajectory32 = dynamics::Trajectory<f32>;
pub type DriftSpec64 = dynamics::DriftSpec<f64>;
pub type MsdSeries64 = observables::MsdSeries<f64>;
pub type TrialFunction64 = observables::TrialFunction<f64>;
