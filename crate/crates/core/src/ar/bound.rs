//! Population MCRB bound on log-spectrum MSE for AR(m) fits of an ARMA truth.

use nalgebra::DMatrix;
use rand::Rng;

use super::arma::{log_spectrum_arma, simulate_arma, ArmaModel};
use super::autocov::{levinson_durbin, sample_autocov, ArFit};
use super::likelihood::{pair_with_quadratic, quadratic_with_autocov, BMode};
use super::spectrum::{log_spectrum_ar, spectrum_jacobian, SpectrumGrid};
use crate::error::{Error, Result};
use crate::mcrb::{mapped_cov_trace, sandwich_mcrb, SandwichPair};
use crate::scalar::Real;

/// Asymptotic CRB on the frequency-averaged variance of a correctly specified
/// ARMA(p, q) log-spectrum estimate: `2(p+q+1)/T`.
pub fn whittle_crb<T: Real>(p: usize, q: usize, t: usize) -> T {
    T::from_usize_lossy(2 * (p + q + 1)) / T::from_usize_lossy(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoTrue<T: Real> {
    pub fit: ArFit<T>,
    pub log_spectrum: Vec<T>,
}

/// Pseudo-true AR(m) parameters for each requested order: the average of `k`
/// Yule–Walker fits on independent length-`t_large` realizations, mapped to
/// a log-spectrum afterwards.
pub fn pseudo_true_orders<T: Real, R: Rng + ?Sized>(
    model: &ArmaModel<T>,
    orders: &[usize],
    t_large: usize,
    k: usize,
    grid: &SpectrumGrid<T>,
    rng: &mut R,
) -> Result<Vec<PseudoTrue<T>>> {
    let max = orders.iter().copied().max().ok_or(Error::EmptyCandidateSet)?;
    if t_large < 3 * max + 1 {
        return Err(Error::TooFewSamples { needed: 3 * max + 1, order: max, got: t_large });
    }
    if k == 0 {
        return Err(Error::InvalidScenario("pseudo-true averaging needs at least one run".into()));
    }
    let mut sums: Vec<(T, Vec<T>)> = orders.iter().map(|&m| (T::zero(), vec![T::zero(); m])).collect();
    for _ in 0..k {
        let x = simulate_arma(model, t_large, rng)?;
        let lev = levinson_durbin(&sample_autocov(&x, max)?, max)?;
        for (sum, &m) in sums.iter_mut().zip(orders) {
            sum.0 += lev.variances[m];
            for (acc, &a) in sum.1.iter_mut().zip(&lev.coeffs[m]) {
                *acc += a;
            }
        }
    }
    let kk = T::from_usize_lossy(k);
    sums.into_iter()
        .map(|(var, coeffs)| {
            let forward: Vec<T> = coeffs.into_iter().map(|a| a / kk).collect();
            let fit = ArFit::from_coeffs(var / kk, &forward)?;
            let log_spectrum = log_spectrum_ar(&fit, grid);
            Ok(PseudoTrue { fit, log_spectrum })
        })
        .collect()
}

pub fn pseudo_true<T: Real, R: Rng + ?Sized>(
    model: &ArmaModel<T>,
    m: usize,
    t_large: usize,
    k: usize,
    grid: &SpectrumGrid<T>,
    rng: &mut R,
) -> Result<PseudoTrue<T>> {
    Ok(pseudo_true_orders(model, &[m], t_large, k, grid, rng)?.remove(0))
}

/// Monte Carlo sizes for the population bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundSettings {
    /// Realization length for the pseudo-true average.
    pub t_large: usize,
    /// Number of realizations averaged for the pseudo-true parameters.
    pub k_pseudo: usize,
    /// Number of length-`T` realizations averaged into `A` and `B`.
    pub k_mc: usize,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self { t_large: 100_000, k_pseudo: 50, k_mc: 200 }
    }
}

/// Per-frequency-mean MCRB bound for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumBound<T: Real> {
    pub order: usize,
    /// `‖φ − φ₀^(m)‖² / W`.
    pub bias_sq: T,
    /// `tr(J·MCRB·Jᵀ) / W` with `A` and `B` averaged over the realizations.
    pub cov_trace: T,
    pub total: T,
    /// The covariance term from each realization's own sandwich.
    pub per_run_cov: Vec<T>,
    pub pseudo_true: PseudoTrue<T>,
}

#[derive(Debug, Clone)]
pub struct SpectrumBounds<T: Real> {
    pub bounds: Vec<SpectrumBound<T>>,
    pub dropped: Vec<(usize, Error)>,
}

/// Bounds for several orders at sample size `t`. Orders with `t < 3m+1` are
/// dropped; the remaining orders share the same simulated realizations.
pub fn spectrum_bounds<T: Real, R: Rng + ?Sized>(
    model: &ArmaModel<T>,
    orders: &[usize],
    grid: &SpectrumGrid<T>,
    t: usize,
    settings: &BoundSettings,
    rng: &mut R,
) -> Result<SpectrumBounds<T>> {
    let (feasible, mut dropped): (Vec<usize>, Vec<usize>) = orders.iter().partition(|&&m| t > 3 * m);
    let mut dropped: Vec<(usize, Error)> =
        dropped.drain(..).map(|m| (m, Error::TooFewSamples { needed: 3 * m + 1, order: m, got: t })).collect();
    if feasible.is_empty() {
        return Ok(SpectrumBounds { bounds: Vec::new(), dropped });
    }
    let pseudo = pseudo_true_orders(model, &feasible, settings.t_large, settings.k_pseudo, grid, rng)?;
    let truth = log_spectrum_arma(model, grid);
    let max = *feasible.iter().max().expect("nonempty");
    let w = T::from_usize_lossy(grid.len());

    let mut a_sum: Vec<DMatrix<T>> = feasible.iter().map(|&m| DMatrix::zeros(m + 1, m + 1)).collect();
    let mut b_sum = a_sum.clone();
    let jacobians: Vec<DMatrix<T>> = pseudo.iter().map(|p| spectrum_jacobian(&p.fit, grid)).collect();
    let mut per_run: Vec<Vec<T>> = vec![Vec::with_capacity(settings.k_mc); feasible.len()];
    let mut failed = vec![None; feasible.len()];
    for _ in 0..settings.k_mc {
        let x = simulate_arma(model, t, rng)?;
        let r = sample_autocov(&x, max)?;
        for (i, p) in pseudo.iter().enumerate() {
            if failed[i].is_some() {
                continue;
            }
            let q = quadratic_with_autocov(&x, &r, p.fit.order());
            let run = pair_with_quadratic(&p.fit, &x, &q, BMode::PerSampleScore).and_then(|pair| {
                let cov = mapped_cov_trace(&jacobians[i], &sandwich_mcrb(&pair)?)? / w;
                Ok((pair, cov))
            });
            match run {
                Ok((pair, cov)) => {
                    a_sum[i] += pair.a();
                    b_sum[i] += pair.b();
                    per_run[i].push(cov);
                }
                Err(e) => failed[i] = Some(e),
            }
        }
    }

    let kk = T::from_usize_lossy(settings.k_mc.max(1));
    let mut bounds = Vec::with_capacity(feasible.len());
    for (i, ((p, &m), runs)) in pseudo.into_iter().zip(&feasible).zip(per_run).enumerate() {
        if let Some(e) = failed[i].take() {
            dropped.push((m, e));
            continue;
        }
        let bias_sq = truth.iter().zip(&p.log_spectrum).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>() / w;
        let cov = SandwichPair::new(&a_sum[i] / kk, &b_sum[i] / kk)
            .and_then(|pair| sandwich_mcrb(&pair))
            .and_then(|c| mapped_cov_trace(&jacobians[i], &c));
        match cov {
            Ok(c) => {
                let cov_trace = c / w;
                bounds.push(SpectrumBound { order: m, bias_sq, cov_trace, total: bias_sq + cov_trace, per_run_cov: runs, pseudo_true: p });
            }
            Err(e) => dropped.push((m, e)),
        }
    }
    dropped.sort_by_key(|(m, _)| *m);
    Ok(SpectrumBounds { bounds, dropped })
}

pub fn spectrum_bound<T: Real, R: Rng + ?Sized>(
    model: &ArmaModel<T>,
    m: usize,
    grid: &SpectrumGrid<T>,
    t: usize,
    settings: &BoundSettings,
    rng: &mut R,
) -> Result<SpectrumBound<T>> {
    let mut out = spectrum_bounds(model, &[m], grid, t, settings, rng)?;
    match out.bounds.pop() {
        Some(b) => Ok(b),
        None => Err(out.dropped.pop().map(|(_, e)| e).unwrap_or(Error::AllCandidatesFailed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ar::arma::InnovationLaw;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn whittle_values() {
        assert!((whittle_crb::<f64>(0, 5, 1000) - 0.012).abs() < 1e-15);
        assert_eq!(whittle_crb::<f64>(0, 0, 2), 1.0);
        assert!((whittle_crb::<f64>(2, 1, 400) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn nested_ar_pseudo_true_is_truth() {
        let model = ArmaModel::new(vec![-0.75f64, 0.5], vec![1.0], 1.0, InnovationLaw::Gaussian).unwrap();
        let grid = SpectrumGrid::uniform(64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = pseudo_true(&model, 4, 100_000, 50, &grid, &mut rng).unwrap();
        let a = p.fit.forward_coeffs();
        // per-run standard errors are about 1/sqrt(T); averaged over 50 runs
        let se = 1.0 / (100_000.0f64 * 50.0).sqrt();
        let want = [-0.75, 0.5, 0.0, 0.0];
        for (got, want) in a.iter().zip(want) {
            assert!((got - want).abs() < 3.0 * 1.5 * se, "{got} vs {want}");
        }
        assert!((p.fit.innov_var() - 1.0).abs() < 3.0 * 2f64.sqrt() * se);
    }

    #[test]
    fn ma5_first_order_pseudo_true() {
        let model = ArmaModel::moving_average(5, 1.0f64, InnovationLaw::Gaussian).unwrap();
        let grid = SpectrumGrid::uniform(16).unwrap();
        let p = pseudo_true(&model, 1, 100_000, 50, &grid, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!((p.fit.forward_coeffs()[0] + 5.0 / 6.0).abs() < 3e-3);
    }

    #[test]
    fn pseudo_true_is_deterministic() {
        let model = ArmaModel::moving_average(2, 1.0, InnovationLaw::Laplacian).unwrap();
        let grid = SpectrumGrid::uniform(8).unwrap();
        let a = pseudo_true(&model, 3, 2000, 3, &grid, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = pseudo_true(&model, 3, 2000, 3, &grid, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn well_specified_bound_near_whittle() {
        let model = ArmaModel::new(vec![-0.75, 0.5], vec![1.0], 1.0, InnovationLaw::Gaussian).unwrap();
        let grid = SpectrumGrid::uniform(256).unwrap();
        let settings = BoundSettings { t_large: 100_000, k_pseudo: 20, k_mc: 50 };
        let b = spectrum_bound(&model, 2, &grid, 10_000, &settings, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let crb: f64 = whittle_crb(2, 0, 10_000);
        assert!(b.bias_sq < 1e-3);
        assert!(b.total < 2.0 * crb && b.total > 0.5 * crb, "{} vs {crb}", b.total);
    }

    #[test]
    fn infeasible_orders_dropped() {
        let model = ArmaModel::moving_average(1, 1.0, InnovationLaw::Gaussian).unwrap();
        let grid = SpectrumGrid::uniform(8).unwrap();
        let settings = BoundSettings { t_large: 1000, k_pseudo: 2, k_mc: 3 };
        let out = spectrum_bounds(&model, &[1, 40], &grid, 100, &settings, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(out.bounds.len(), 1);
        assert_eq!(out.dropped[0].0, 40);
    }
}
