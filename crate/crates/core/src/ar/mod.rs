//! Autoregressive spectral estimation of ARMA processes with MCRB-driven
//! order selection.

mod arma;
mod autocov;
mod bound;
mod criterion;
mod likelihood;
mod spectrum;

pub use arma::{is_stable, log_spectrum_arma, simulate_arma, ArmaModel, InnovationLaw, STABILITY_RADIUS};
pub use autocov::{fit_from_levinson, levinson_durbin, sample_autocov, step_down, yule_walker, ArFit, Levinson};
pub use bound::{pseudo_true, pseudo_true_orders, spectrum_bound, spectrum_bounds, whittle_crb, BoundSettings, PseudoTrue, SpectrumBound, SpectrumBounds};
pub use criterion::{ar_baseline_criteria, spectrum_criterion, spectrum_mse, BiasEstimate, SpectrumCandidate, SpectrumCriterionOptions, SpectrumSelection};
pub use likelihood::{
    approx_ml_fit, approx_quadratic, build_edge_matrices, loglik_approx, sample_mcrb, sample_sandwich_pair, score_and_hessian, BMode,
    EdgeMatrices,
};
pub use spectrum::{clamped_frequencies, log_spectrum_ar, spectrum_jacobian, SpectrumGrid, POLY_FLOOR};
