//! Direction-of-arrival estimation under unknown clutter.
//!
//! A uniform linear array observes target-free training snapshots (clutter plus
//! white noise) and a target set. Candidate covariance models keep the `m`
//! largest sample eigenvalues and average the rest; each candidate is scored by
//! its misspecified bound on the DOA error and the smallest one wins.

mod bound;
mod covariance;
mod criterion;
mod estimate;
mod geometry;
mod scenario;

pub use bound::{mcrb_doa, mcrb_doa_full, population_bound, DoaSandwich};
pub use covariance::{
    hermitian_inverse, sample_covariance, truncate_covariance, CovarianceEigen, HermitianMatrix, TruncatedCovariance,
    LOADING_EPS,
};
pub use criterion::{doa_criterion, training_eigen, wax_criteria, DoaCandidate, DoaCriterionOptions, DoaSelection, Loading, Plugin, SelectionRule};
pub use estimate::{ml_doa, ml_objective};
pub use geometry::{steering, steering_derivative, UlaGeometry};
pub use scenario::{design_signals, simulate_target, simulate_training, DoaScenario};

pub type Cplx<T> = nalgebra::Complex<T>;
