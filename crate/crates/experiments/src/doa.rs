//! DOA experiments: per-order bounds, and RMSE of the selection rules under
//! SNR and training-size sweeps.

use mcrb_core::doa::{
    doa_criterion, ml_doa, population_bound, simulate_target, simulate_training, training_eigen, wax_criteria,
    DoaCriterionOptions, Loading,
};
use mcrb_core::DoaScenario;
use rand::Rng;
use rayon::ThreadPool;

use crate::config::ExperimentConfig;
use crate::error::{ExpError, ExpResult};
use crate::harness::{check_failures, run_trials};
use crate::summary::{bound_min, log_failures, summarize_outcomes, BoundSummary, Criterion, CriterionSummary, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub struct DoaTrial {
    pub sweep_value: f64,
    pub trial_index: usize,
    /// Indexed like [`Criterion::ALL`]. `None` when a rule had no admissible order.
    pub outcomes: [Option<Outcome>; 4],
    /// `B^(m)` for `m = 0..N−1`, evaluated with the true disturbance covariance.
    pub bounds: Vec<Option<f64>>,
}

/// `B^(m)` for every order of the training covariance in `scn`, using the
/// true disturbance covariance and the true direction.
fn bounds_per_order(scn: &DoaScenario, eigen: &mcrb_core::doa::CovarianceEigen<f64>) -> Vec<Option<f64>> {
    let r_true = scn.disturbance_covariance();
    let energy = scn.signal_energy();
    (0..eigen.dim())
        .map(|m| {
            let model = eigen.truncate(m).ok()?;
            population_bound(scn.psi_true(), scn.geometry(), &model, &r_true, energy).ok()
        })
        .collect()
}

/// One Monte Carlo trial of the selection comparison.
pub fn doa_trial<R: Rng + ?Sized>(
    scn: &DoaScenario,
    opts: &DoaCriterionOptions<f64>,
    sweep_value: f64,
    trial_index: usize,
    rng: &mut R,
) -> ExpResult<DoaTrial> {
    let x_train = simulate_training(scn, rng);
    let x_target = simulate_target(scn, rng);
    let geom = scn.geometry();
    let sel = doa_criterion(&x_train, &x_target, geom, opts)?;
    let truth = scn.psi_true();
    let ic = wax_criteria(sel.eigen.eigvals().as_slice(), scn.n_training(), geom.n_sensors())?;

    let estimate_at = |m: usize| -> ExpResult<f64> {
        match sel.psi_hat(m) {
            Some(p) => Ok(p),
            None => Ok(ml_doa(&x_target, &sel.model(m)?, geom, &opts.search)?),
        }
    };
    let mut outcomes = [None; 4];
    outcomes[0] = Some(Outcome { selected_m: sel.selection.selected, error: sel.estimate - truth });
    for (slot, pick) in outcomes[1..].iter_mut().zip([ic.selected_aic(), ic.selected_aicc(), ic.selected_mdl()]) {
        if let Some(m) = pick {
            *slot = Some(Outcome { selected_m: m, error: estimate_at(m)? - truth });
        }
    }
    Ok(DoaTrial { sweep_value, trial_index, outcomes, bounds: bounds_per_order(scn, &sel.eigen) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoaPointSummary {
    pub sweep_value: f64,
    pub trials: usize,
    pub trials_failed: usize,
    pub criteria: Vec<CriterionSummary>,
    pub bounds: Vec<BoundSummary>,
}

impl DoaPointSummary {
    pub fn criterion(&self, c: Criterion) -> &CriterionSummary {
        self.criteria.iter().find(|s| s.criterion == c).expect("all criteria summarized")
    }

    pub fn bound_min(&self) -> Option<(f64, usize)> {
        bound_min(&self.bounds)
    }
}

fn collect_bounds(n_orders: usize, per_trial: &[&Vec<Option<f64>>]) -> Vec<BoundSummary> {
    (0..n_orders)
        .map(|m| {
            let vals: Vec<f64> = per_trial.iter().filter_map(|b| b.get(m).copied().flatten()).collect();
            BoundSummary::from_values(m, &vals)
        })
        .collect()
}

pub fn summarize_doa(sweep_value: f64, n_sensors: usize, results: &[ExpResult<DoaTrial>]) -> DoaPointSummary {
    let ok: Vec<&DoaTrial> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let trials = results.len();
    let criteria = summarize_outcomes(trials, &ok.iter().map(|t| t.outcomes).collect::<Vec<_>>());
    let bounds = collect_bounds(n_sensors, &ok.iter().map(|t| &t.bounds).collect::<Vec<_>>());
    DoaPointSummary { sweep_value, trials, trials_failed: trials - ok.len(), criteria, bounds }
}

/// SNR or training-size sweep comparing the four selection rules.
///
/// Every sweep point is run and summarized before the failure limit is
/// checked, so the caller can still write partial results.
pub fn run_doa_rmse(cfg: &ExperimentConfig, pool: &ThreadPool) -> ExpResult<(Vec<DoaPointSummary>, Option<ExpError>)> {
    let params = cfg.doa.as_ref().ok_or_else(|| ExpError::Config("missing doa block".into()))?;
    let opts = params.criterion_options();
    let mut out = Vec::with_capacity(cfg.sweep.len());
    let mut breach = None;
    for (si, &v) in cfg.sweep.iter().enumerate() {
        let scn = params.scenario(cfg.experiment, v)?;
        let results = run_trials(pool, cfg.master_seed, si, cfg.trials, |rng, t| doa_trial(&scn, &opts, v, t, rng));
        log_failures(cfg.experiment.name(), v, &results);
        let summary = summarize_doa(v, params.n_sensors, &results);
        let worst = summary.criteria.iter().map(|c| c.failed).max().unwrap_or(0);
        if breach.is_none() {
            breach = check_failures(v, worst, cfg.trials).err();
        }
        out.push(summary);
    }
    Ok((out, breach))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundPoint {
    pub sweep_value: f64,
    pub trials: usize,
    pub trials_failed: usize,
    pub bounds: Vec<BoundSummary>,
}

/// Trial-mean `B^(m)` per order from training data alone.
pub fn run_doa_bound(cfg: &ExperimentConfig, pool: &ThreadPool) -> ExpResult<(Vec<BoundPoint>, Option<ExpError>)> {
    let params = cfg.doa.as_ref().ok_or_else(|| ExpError::Config("missing doa block".into()))?;
    let mut out = Vec::with_capacity(cfg.sweep.len());
    let mut breach = None;
    for (si, &v) in cfg.sweep.iter().enumerate() {
        let scn = params.scenario(cfg.experiment, v)?;
        let results = run_trials(pool, cfg.master_seed, si, cfg.trials, |rng, _| {
            let x_train = simulate_training(&scn, rng);
            let (eigen, _) = training_eigen(&x_train, Loading::Auto)?;
            Ok(bounds_per_order(&scn, &eigen))
        });
        log_failures(cfg.experiment.name(), v, &results);
        let ok: Vec<&Vec<Option<f64>>> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        let bounds = collect_bounds(params.n_sensors, &ok);
        let failed = results.len() - ok.len();
        let worst = bounds.iter().map(|b| cfg.trials - b.count).max().unwrap_or(0);
        if breach.is_none() {
            breach = check_failures(v, worst.max(failed), cfg.trials).err();
        }
        out.push(BoundPoint { sweep_value: v, trials: cfg.trials, trials_failed: failed, bounds });
    }
    Ok((out, breach))
}
