use std::fs::File;
use std::path::Path;

use mcrb_core::ar::whittle_crb;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::doa::{BoundPoint, DoaPointSummary};
use crate::error::{ExpError, ExpResult};
use crate::spectrum::{SpectrumBoundPoint, SpectrumPointSummary};

pub const DOA_RMSE_HEADER: [&str; 6] = ["sweep_var", "sweep_value", "criterion", "rmse_rad", "mean_selected_m", "trials_ok"];
pub const BOUND_HEADER: [&str; 4] = ["sweep_value", "m", "mean_bound", "std_bound"];
pub const SPECTRUM_RMSE_HEADER: [&str; 5] = ["T", "criterion", "rmse_log_spectrum", "mean_selected_m", "trials_ok"];
pub const SPECTRUM_TERMS_HEADER: [&str; 6] = ["T", "m", "bias_sq", "cov_trace", "total", "whittle_crb"];

/// Row label carrying the square root of the smallest per-order mean bound.
pub const BOUND_MIN: &str = "bound_min";

/// Seventeen significant digits, so every `f64` survives a round trip.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

pub(crate) fn writer(path: &Path) -> ExpResult<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| ExpError::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> ExpResult<()> {
    w.flush().map_err(|e| ExpError::io(path, e))
}

pub fn write_doa_rmse(path: &Path, sweep_var: &str, points: &[DoaPointSummary]) -> ExpResult<()> {
    let mut w = writer(path)?;
    w.write_record(DOA_RMSE_HEADER)?;
    for p in points {
        let sv = num(p.sweep_value);
        for c in &p.criteria {
            let ok = p.trials - c.failed;
            w.write_record([sweep_var, &sv, c.criterion.name(), &num(c.stat.rmse), &num(c.mean_selected_m), &ok.to_string()])?;
        }
        let (value, m, ok) = match p.bound_min() {
            Some((v, m)) => (v, m as f64, p.bounds[m].count),
            None => (f64::NAN, f64::NAN, 0),
        };
        w.write_record([sweep_var, &sv, BOUND_MIN, &num(value), &num(m), &ok.to_string()])?;
    }
    finish(w, path)
}

pub fn write_doa_bound(path: &Path, points: &[BoundPoint]) -> ExpResult<()> {
    let mut w = writer(path)?;
    w.write_record(BOUND_HEADER)?;
    for p in points {
        for b in &p.bounds {
            w.write_record([num(p.sweep_value), b.m.to_string(), num(b.mean), num(b.std)])?;
        }
    }
    finish(w, path)
}

pub fn write_spectrum_bound(path: &Path, points: &[SpectrumBoundPoint]) -> ExpResult<()> {
    let mut w = writer(path)?;
    w.write_record(BOUND_HEADER)?;
    for p in points {
        for b in &p.bounds {
            w.write_record([num(p.t as f64), b.order.to_string(), num(b.total), num(p.std_of(b))])?;
        }
    }
    finish(w, path)
}

/// Bias and covariance parts of each spectral bound, beside the Whittle
/// bound of an order-`m` AR model at the same sample size.
pub fn write_spectrum_terms(path: &Path, points: &[SpectrumBoundPoint]) -> ExpResult<()> {
    let mut w = writer(path)?;
    w.write_record(SPECTRUM_TERMS_HEADER)?;
    for p in points {
        for b in &p.bounds {
            let whittle: f64 = whittle_crb(b.order, 0, p.t);
            w.write_record([p.t.to_string(), b.order.to_string(), num(b.bias_sq), num(b.cov_trace), num(b.total), num(whittle)])?;
        }
    }
    finish(w, path)
}

pub fn write_spectrum_rmse(path: &Path, points: &[SpectrumPointSummary]) -> ExpResult<()> {
    let mut w = writer(path)?;
    w.write_record(SPECTRUM_RMSE_HEADER)?;
    for p in points {
        let t = p.t.to_string();
        for c in &p.criteria {
            let ok = p.trials - c.failed;
            w.write_record([&t, c.criterion.name(), &num(c.stat.rmse), &num(c.mean_selected_m), &ok.to_string()])?;
        }
        let (value, m) = p.bound.bound_min().map_or((f64::NAN, f64::NAN), |(v, m)| (v, m as f64));
        w.write_record([&t, BOUND_MIN, &num(value), &num(m), &p.bound.realizations.to_string()])?;
    }
    finish(w, path)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureCount {
    pub sweep_value: f64,
    pub failed: usize,
    pub total: usize,
}

/// Everything needed to reproduce a run. Worker count and wall time are left
/// out because they do not change any result.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: &'static str,
    pub master_seed: u64,
    pub config: &'a ExperimentConfig,
    pub files: Vec<String>,
    pub failures: Vec<FailureCount>,
    pub dropped_orders: Vec<(f64, usize, String)>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest<'_>) -> ExpResult<()> {
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| ExpError::io(path, e))
}
