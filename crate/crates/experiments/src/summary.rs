//! Selection rules compared in the experiments and their per-point summaries.

use crate::error::ExpResult;
use crate::harness::{mean_sd, RmseStat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Mcrb,
    Aic,
    Aicc,
    Mdl,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Mcrb, Criterion::Aic, Criterion::Aicc, Criterion::Mdl];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Mcrb => "mcrb",
            Criterion::Aic => "aic",
            Criterion::Aicc => "aicc",
            Criterion::Mdl => "mdl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub selected_m: usize,
    /// Signed error whose square is averaged into the RMSE.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionSummary {
    pub criterion: Criterion,
    pub stat: RmseStat,
    pub mean_selected_m: f64,
    /// Trials without an estimate from this rule, including failed trials.
    pub failed: usize,
}

/// Summary per rule over the successful trials; `trials` counts failed ones too.
pub fn summarize_outcomes(trials: usize, outcomes: &[[Option<Outcome>; 4]]) -> Vec<CriterionSummary> {
    Criterion::ALL
        .iter()
        .enumerate()
        .map(|(i, &criterion)| {
            let picks: Vec<Outcome> = outcomes.iter().filter_map(|o| o[i]).collect();
            let sq: Vec<f64> = picks.iter().map(|o| o.error * o.error).collect();
            let orders: Vec<f64> = picks.iter().map(|o| o.selected_m as f64).collect();
            CriterionSummary {
                criterion,
                stat: RmseStat::from_squared(&sq),
                mean_selected_m: mean_sd(&orders).0,
                failed: trials - picks.len(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSummary {
    pub m: usize,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl BoundSummary {
    pub fn from_values(m: usize, values: &[f64]) -> Self {
        let (mean, std) = mean_sd(values);
        Self { m, mean, std, count: values.len() }
    }
}

/// `sqrt(min_m mean B^(m))` and the minimizing order.
pub fn bound_min(bounds: &[BoundSummary]) -> Option<(f64, usize)> {
    bounds
        .iter()
        .filter(|b| b.count > 0 && b.mean.is_finite())
        .min_by(|a, b| a.mean.total_cmp(&b.mean).then(a.m.cmp(&b.m)))
        .map(|b| (b.mean.sqrt(), b.m))
}

pub(crate) fn log_failures<T>(label: &str, sweep_value: f64, results: &[ExpResult<T>]) {
    for (i, r) in results.iter().enumerate() {
        if let Err(e) = r {
            log::warn!("{label} sweep {sweep_value} trial {i} failed: {e}");
        }
    }
}

