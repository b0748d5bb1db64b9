use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{ExpError, ExpResult};
use crate::rng::derive_trial_rng;

/// Largest tolerated fraction of failed trials per sweep point.
pub const FAILURE_LIMIT: f64 = 0.01;

/// Runs `trials` independent trials of one sweep point on `pool`.
///
/// Results come back indexed by trial, whatever order the workers finish in.
pub fn run_trials<R, F>(pool: &ThreadPool, master_seed: u64, sweep_index: usize, trials: usize, trial: F) -> Vec<ExpResult<R>>
where
    R: Send,
    F: Fn(&mut ChaCha20Rng, usize) -> ExpResult<R> + Sync,
{
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = derive_trial_rng(master_seed, sweep_index as u32, t as u32);
                trial(&mut rng, t)
            })
            .collect()
    })
}

pub fn build_pool(workers: Option<usize>) -> ExpResult<ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(ExpError::Config("workers must be at least 1".into()));
        }
        builder = builder.num_threads(w);
    }
    builder.build().map_err(|e| ExpError::Config(format!("cannot start worker pool: {e}")))
}

pub fn check_failures(sweep_value: f64, failed: usize, total: usize) -> ExpResult<()> {
    if failed as f64 > FAILURE_LIMIT * total as f64 {
        Err(ExpError::FailureThreshold { sweep_value, failed, total })
    } else {
        Ok(())
    }
}

/// Root-mean-square summary of a set of squared errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseStat {
    pub rmse: f64,
    /// Delta-method standard error of `rmse`.
    pub se: f64,
    pub count: usize,
}

impl RmseStat {
    /// The mean is taken with pairwise summation of the sorted values, so the
    /// result does not depend on the order the trials arrive in.
    pub fn from_squared(sq: &[f64]) -> Self {
        let n = sq.len();
        if n == 0 {
            return Self { rmse: f64::NAN, se: f64::NAN, count: 0 };
        }
        let (mean, sd) = mean_sd(sq);
        let rmse = mean.sqrt();
        let se = if rmse > 0.0 { sd / (n as f64).sqrt() / (2.0 * rmse) } else { 0.0 };
        Self { rmse, se, count: n }
    }
}

/// Order-independent mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = pairwise_sum(&sorted) / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = sorted.iter().map(|v| (v - mean) * (v - mean)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (pairwise_sum(&dev) / (n - 1) as f64).sqrt())
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}
