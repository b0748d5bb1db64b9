//! Monte Carlo harness for MCRB-based model order selection.
//!
//! Each experiment family reads an [`ExperimentConfig`], runs its trials on a
//! worker pool with per-trial random streams, and writes result CSVs, a plot
//! table per CSV and a run manifest into the output directory.

pub mod config;
pub mod doa;
pub mod error;
pub mod harness;
pub mod output;
pub mod plotdata;
pub mod rng;
pub mod selftest;
pub mod spectrum;
pub mod summary;

use std::path::{Path, PathBuf};

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{ExpError, ExpResult};
pub use plotdata::emit_plotdata;
pub use rng::derive_trial_rng;

use output::{FailureCount, Manifest};

/// Files written by a run and a human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub table: Vec<String>,
}

/// Runs `cfg` and writes its outputs into `out_dir`.
///
/// `degrees` only changes the DOA units in the returned table; files always
/// hold radians. If more than 1% of the trials at some sweep point fail, all
/// outputs are still written and [`ExpError::FailureThreshold`] is returned.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path, workers: Option<usize>, degrees: bool) -> ExpResult<RunReport> {
    cfg.validate()?;
    if cfg.experiment == ExperimentKind::Selftest {
        let table = selftest::run_selftest()
            .into_iter()
            .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect();
        return Ok(RunReport { files: vec![], table });
    }
    let pool = harness::build_pool(workers)?;
    std::fs::create_dir_all(out_dir).map_err(|e| ExpError::io(out_dir, e))?;
    let file = |name: &str| out_dir.join(name);
    let unit = if degrees { ("deg", 1f64.to_degrees()) } else { ("rad", 1.0) };

    let mut csvs = Vec::new();
    let mut extra = Vec::new();
    let mut table = Vec::new();
    let mut failures = Vec::new();
    let mut dropped_orders = Vec::new();
    let mut breach = None;
    match cfg.experiment {
        ExperimentKind::Selftest => unreachable!("handled above"),
        ExperimentKind::DoaBound => {
            let (points, b) = doa::run_doa_bound(cfg, &pool)?;
            breach = b;
            let path = file("doa_bound.csv");
            output::write_doa_bound(&path, &points)?;
            csvs.push(path);
            for p in &points {
                failures.push(FailureCount { sweep_value: p.sweep_value, failed: p.trials_failed, total: p.trials });
                let (v, m) = summary::bound_min(&p.bounds).unwrap_or((f64::NAN, 0));
                table.push(format!("snr_db={}: min root bound {:.4e} {} at m={m}", p.sweep_value, v * unit.1, unit.0));
            }
        }
        ExperimentKind::DoaRmseSnr | ExperimentKind::DoaRmseT => {
            let (points, b) = doa::run_doa_rmse(cfg, &pool)?;
            breach = b;
            let name = if cfg.experiment == ExperimentKind::DoaRmseSnr { "doa_rmse_snr.csv" } else { "doa_rmse_T.csv" };
            let path = file(name);
            output::write_doa_rmse(&path, cfg.experiment.sweep_var(), &points)?;
            csvs.push(path);
            for p in &points {
                failures.push(FailureCount { sweep_value: p.sweep_value, failed: p.trials_failed, total: p.trials });
                let mut line = format!("{}={}:", cfg.experiment.sweep_var(), p.sweep_value);
                for c in &p.criteria {
                    line += &format!(" {}={:.4e}", c.criterion.name(), c.stat.rmse * unit.1);
                }
                let bm = p.bound_min().map_or(f64::NAN, |(v, _)| v);
                line += &format!(" bound_min={:.4e} ({})", bm * unit.1, unit.0);
                table.push(line);
            }
        }
        ExperimentKind::SpectrumBound => {
            let points = spectrum::run_spectrum_bound(cfg, &pool)?;
            let path = file("spectrum_bound.csv");
            output::write_spectrum_bound(&path, &points)?;
            csvs.push(path);
            let terms = file("spectrum_bound_terms.csv");
            output::write_spectrum_terms(&terms, &points)?;
            csvs.push(terms);
            for p in &points {
                dropped_orders.extend(p.dropped.iter().map(|(m, why)| (p.t as f64, *m, why.clone())));
                let mut line = format!("T={}:", p.t);
                for b in &p.bounds {
                    line += &format!(" m{}={:.4e}", b.order, b.total);
                }
                table.push(line);
            }
        }
        ExperimentKind::SpectrumRmse => {
            let (points, b) = spectrum::run_spectrum_rmse(cfg, &pool)?;
            breach = b;
            let path = file("spectrum_rmse.csv");
            output::write_spectrum_rmse(&path, &points)?;
            csvs.push(path);
            for p in &points {
                failures.push(FailureCount { sweep_value: p.t as f64, failed: p.trials_failed, total: p.trials });
                dropped_orders.extend(p.bound.dropped.iter().map(|(m, why)| (p.t as f64, *m, why.clone())));
                let mut line = format!("T={}:", p.t);
                for c in &p.criteria {
                    line += &format!(" {}={:.4e}", c.criterion.name(), c.stat.rmse);
                }
                line += &format!(" bound_min={:.4e}", p.bound.bound_min().map_or(f64::NAN, |(v, _)| v));
                table.push(line);
            }
        }
    }
    for csv in &csvs {
        extra.push(emit_plotdata(csv, out_dir)?);
    }
    let mut files: Vec<PathBuf> = csvs.into_iter().chain(extra).collect();
    let manifest_path = file("manifest.json");
    let manifest = Manifest {
        tool: "mcrb-select",
        version: env!("CARGO_PKG_VERSION"),
        experiment: cfg.experiment.name(),
        master_seed: cfg.master_seed,
        config: cfg,
        files: files.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect(),
        failures,
        dropped_orders,
    };
    output::write_manifest(&manifest_path, &manifest)?;
    files.push(manifest_path);
    match breach {
        Some(e) => Err(e),
        None => Ok(RunReport { files, table }),
    }
}
