//! Equilibrium point fields: Ginibre (determinantal), Poisson, and Gibbs with
//! a Ruelle-class pair potential.

mod gibbs;
mod ginibre;
mod kernel;
mod poisson;

pub use gibbs::{sample_gibbs, sample_gibbs_with, GibbsPotential, GibbsProposals, GibbsRun, PairPotential};
pub use ginibre::{ginibre_eigenvalues, ginibre_window_radius, sample_ginibre};
pub use kernel::{clamped_count, correlation, correlation_detailed, kernel_eval, CorrelationValue, KernelSpec};
pub use poisson::sample_poisson;
