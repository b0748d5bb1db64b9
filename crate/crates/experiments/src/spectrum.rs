//! AR spectral-estimation experiments.

use mcrb_core::ar::{
    ar_baseline_criteria, fit_from_levinson, levinson_durbin, log_spectrum_ar, log_spectrum_arma, sample_autocov,
    simulate_arma, spectrum_bounds, spectrum_criterion, spectrum_mse, ArmaModel, BoundSettings, SpectrumBound,
    SpectrumCriterionOptions, SpectrumGrid,
};
use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::{sweep_as_count, ExperimentConfig, SpectrumParams};
use crate::error::{ExpError, ExpResult};
use crate::harness::{check_failures, mean_sd, run_trials};
use crate::rng::derive_sweep_rng;
use crate::summary::{log_failures, summarize_outcomes, Criterion, CriterionSummary, Outcome};

/// Inputs shared by every trial at one sample size.
pub struct SpectrumSetup<'a> {
    pub model: &'a ArmaModel<f64>,
    pub grid: &'a SpectrumGrid<f64>,
    pub truth: &'a [f64],
    pub orders: &'a [usize],
    pub options: SpectrumCriterionOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrial {
    pub t: usize,
    pub trial_index: usize,
    /// Indexed like [`Criterion::ALL`]; `error²` is the per-frequency-mean
    /// squared log-spectrum error.
    pub outcomes: [Option<Outcome>; 4],
}

pub fn spectrum_trial<R: Rng + ?Sized>(setup: &SpectrumSetup<'_>, t: usize, trial_index: usize, rng: &mut R) -> ExpResult<SpectrumTrial> {
    let x = simulate_arma(setup.model, t, rng)?;
    let sel = spectrum_criterion(&x, setup.orders, setup.grid, &setup.options)?;
    let err = |phi: &[f64]| spectrum_mse(phi, setup.truth).sqrt();
    let mut outcomes = [None; 4];
    outcomes[0] = Some(Outcome { selected_m: sel.selection.selected, error: err(&sel.selected().log_spectrum) });

    let mut feasible: Vec<usize> = setup.orders.iter().copied().filter(|&m| t > 3 * m).collect();
    feasible.sort_unstable();
    feasible.dedup();
    let ic = ar_baseline_criteria(sel.r0, &sel.partials, t, &feasible)?;
    let mut levinson = None;
    for (slot, pick) in outcomes[1..].iter_mut().zip([ic.selected_aic(), ic.selected_aicc(), ic.selected_mdl()]) {
        let Some(m) = pick else { continue };
        let error = match sel.candidate(m) {
            Some(c) => err(&c.log_spectrum),
            None => {
                if levinson.is_none() {
                    let r = sample_autocov(&x, sel.reference_order)?;
                    levinson = Some(levinson_durbin(&r, sel.reference_order)?);
                }
                let fit = fit_from_levinson(levinson.as_ref().expect("just computed"), m);
                err(&log_spectrum_ar(&fit, setup.grid))
            }
        };
        *slot = Some(Outcome { selected_m: m, error });
    }
    Ok(SpectrumTrial { t, trial_index, outcomes })
}

/// Population bounds at one sample size.
#[derive(Debug, Clone)]
pub struct SpectrumBoundPoint {
    pub t: usize,
    pub realizations: usize,
    pub bounds: Vec<SpectrumBound<f64>>,
    /// Orders without a bound and the reason.
    pub dropped: Vec<(usize, String)>,
}

impl SpectrumBoundPoint {
    /// `sqrt(min_m bound)` and the minimizing order.
    pub fn bound_min(&self) -> Option<(f64, usize)> {
        self.bounds
            .iter()
            .filter(|b| b.total.is_finite())
            .min_by(|a, b| a.total.total_cmp(&b.total).then(a.order.cmp(&b.order)))
            .map(|b| (b.total.sqrt(), b.order))
    }

    /// Spread of the bound across realizations: the bias plus each
    /// realization's own covariance term.
    pub fn std_of(&self, b: &SpectrumBound<f64>) -> f64 {
        mean_sd(&b.per_run_cov).1
    }
}

fn bound_settings(params: &SpectrumParams, k_mc: usize) -> BoundSettings {
    BoundSettings { t_large: params.t_large, k_pseudo: params.k_pseudo, k_mc }
}

fn bound_point(
    cfg: &ExperimentConfig,
    params: &SpectrumParams,
    model: &ArmaModel<f64>,
    grid: &SpectrumGrid<f64>,
    sweep_index: usize,
    t: usize,
) -> ExpResult<SpectrumBoundPoint> {
    let mut rng = derive_sweep_rng(cfg.master_seed, sweep_index as u32);
    let settings = bound_settings(params, cfg.trials);
    let out = spectrum_bounds(model, &params.orders, grid, t, &settings, &mut rng)?;
    let dropped = out.dropped.into_iter().map(|(m, e)| (m, e.to_string())).collect();
    Ok(SpectrumBoundPoint { t, realizations: cfg.trials, bounds: out.bounds, dropped })
}

fn spectrum_inputs(cfg: &ExperimentConfig) -> ExpResult<(&SpectrumParams, ArmaModel<f64>, SpectrumGrid<f64>)> {
    let params = cfg.spectrum.as_ref().ok_or_else(|| ExpError::Config("missing spectrum block".into()))?;
    Ok((params, params.model()?, params.grid()?))
}

/// Bias, covariance and total bound per order over a sample-size sweep. Each
/// sweep point uses `trials` realizations for `A` and `B`.
pub fn run_spectrum_bound(cfg: &ExperimentConfig, pool: &ThreadPool) -> ExpResult<Vec<SpectrumBoundPoint>> {
    let (params, model, grid) = spectrum_inputs(cfg)?;
    let sizes = cfg.sweep.iter().map(|&v| sweep_as_count(v)).collect::<ExpResult<Vec<_>>>()?;
    let points: Vec<ExpResult<SpectrumBoundPoint>> = pool.install(|| {
        sizes.par_iter().enumerate().map(|(si, &t)| bound_point(cfg, params, &model, &grid, si, t)).collect()
    });
    let points = points.into_iter().collect::<ExpResult<Vec<_>>>()?;
    for p in &points {
        for (m, why) in &p.dropped {
            log::warn!("spectrum-bound T={} order {m} dropped: {why}", p.t);
        }
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct SpectrumPointSummary {
    pub t: usize,
    pub trials: usize,
    pub trials_failed: usize,
    pub criteria: Vec<CriterionSummary>,
    pub bound: SpectrumBoundPoint,
}

impl SpectrumPointSummary {
    pub fn criterion(&self, c: Criterion) -> &CriterionSummary {
        self.criteria.iter().find(|s| s.criterion == c).expect("all criteria summarized")
    }
}

/// RMSE of the log-spectrum under each selection rule, with the minimal
/// population bound at each sample size for reference.
pub fn run_spectrum_rmse(cfg: &ExperimentConfig, pool: &ThreadPool) -> ExpResult<(Vec<SpectrumPointSummary>, Option<ExpError>)> {
    let (params, model, grid) = spectrum_inputs(cfg)?;
    let truth = log_spectrum_arma(&model, &grid);
    let setup = SpectrumSetup { model: &model, grid: &grid, truth: &truth, orders: &params.orders, options: params.criterion_options() };
    let mut out = Vec::with_capacity(cfg.sweep.len());
    let mut breach = None;
    for (si, &v) in cfg.sweep.iter().enumerate() {
        let t = sweep_as_count(v)?;
        let results = run_trials(pool, cfg.master_seed, si, cfg.trials, |rng, i| spectrum_trial(&setup, t, i, rng));
        log_failures(cfg.experiment.name(), v, &results);
        let ok: Vec<[Option<Outcome>; 4]> = results.iter().filter_map(|r| r.as_ref().ok().map(|t| t.outcomes)).collect();
        let criteria = summarize_outcomes(results.len(), &ok);
        let worst = criteria.iter().map(|c| c.failed).max().unwrap_or(0);
        if breach.is_none() {
            breach = check_failures(v, worst, cfg.trials).err();
        }
        let bound = pool.install(|| bound_point(cfg, params, &model, &grid, si, t))?;
        out.push(SpectrumPointSummary { t, trials: results.len(), trials_failed: results.len() - ok.len(), criteria, bound });
    }
    Ok((out, breach))
}
