//! Estimators over trajectories and configuration ensembles.
//!
//! Everything here is a pure function of immutable inputs. Per-sample work
//! may run on the rayon pool, but reductions always happen in input order,
//! so results do not depend on the thread count.

mod cutoff;
mod msd;
mod pair;
mod rigidity;
mod trial;
mod variational;

pub use cutoff::{cutoff_xi, cutoff_xi_derivative};
pub use msd::{
    default_fit_window, msd, msd_samples, rescaled_path, scaling_exponent, ExponentFit, MsdSamples, MsdSeries,
    RescaledPath,
};
pub use pair::{pair_correlation, PairCorrelation};
pub use rigidity::{number_mean_functions, number_variance_profile, NumberStatistics};
pub use trial::{carre_du_champ, shift_derivative_fd, Bump, ShiftDerivative, TrialFunction, BOUNDARY_TOLERANCE};
pub use variational::{variational_bound, VariationalBound};
