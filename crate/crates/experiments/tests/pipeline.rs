use std::fs;
use std::path::Path;

use mcrb_select::config::ExperimentKind;
use mcrb_select::{emit_plotdata, run_experiment, ExpError, ExperimentConfig};

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(kind);
    cfg.trials = 4;
    match kind {
        ExperimentKind::DoaRmseSnr => cfg.sweep = vec![10.0, 30.0],
        ExperimentKind::DoaRmseT => cfg.sweep = vec![8.0, 24.0],
        ExperimentKind::SpectrumBound | ExperimentKind::SpectrumRmse => {
            cfg.sweep = vec![300.0];
            let sp = cfg.spectrum.as_mut().unwrap();
            sp.orders = vec![2, 5, 10];
            sp.grid_size = 64;
            sp.t_large = 4000;
            sp.k_pseudo = 2;
        }
        _ => {}
    }
    cfg
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    rd.records().map(|r| r.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn same_seed_gives_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::DoaRmseSnr);
    let ra = run_experiment(&cfg, a.path(), Some(1), false).unwrap();
    let rb = run_experiment(&cfg, b.path(), None, false).unwrap();
    assert_eq!(ra.table, rb.table);
    for f in &ra.files {
        let name = f.file_name().unwrap();
        assert_eq!(fs::read(f).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?} differs");
    }
}

#[test]
fn different_seeds_give_different_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::DoaRmseSnr);
    run_experiment(&cfg, a.path(), None, false).unwrap();
    cfg.master_seed += 1;
    run_experiment(&cfg, b.path(), None, false).unwrap();
    let name = "doa_rmse_snr.csv";
    assert_ne!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
}

#[test]
fn doa_rmse_csv_has_every_criterion_and_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::DoaRmseT), dir.path(), None, false).unwrap();
    let rows = read_rows(&dir.path().join("doa_rmse_T.csv"));
    assert_eq!(rows[0][..3], ["sweep_var", "sweep_value", "criterion"]);
    assert!(rows[1..].iter().all(|r| r[0] == "n_training"));
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[2].as_str()).collect();
    for want in ["mcrb", "aic", "aicc", "mdl", "bound_min"] {
        assert_eq!(labels.iter().filter(|l| **l == want).count(), 2, "{want}");
    }
    let text = fs::read_to_string(dir.path().join("doa_rmse_T.csv")).unwrap();
    assert!(!text.contains('\r'));
}

#[test]
fn plot_table_copies_cells_verbatim() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&small(ExperimentKind::DoaRmseSnr), dir.path(), None, false).unwrap();
    let csv = dir.path().join("doa_rmse_snr.csv");
    let plot = dir.path().join("plot_doa_rmse_snr.csv");
    let first = fs::read(&plot).unwrap();
    assert_eq!(emit_plotdata(&csv, dir.path()).unwrap(), plot);
    assert_eq!(fs::read(&plot).unwrap(), first);

    let long = read_rows(&csv);
    let wide = read_rows(&plot);
    assert_eq!(wide[0], ["snr_db", "rmse_mcrb", "rmse_aic", "rmse_aicc", "rmse_mdl", "bound_min"]);
    assert_eq!(wide.len(), 3);
    for row in &long[1..] {
        let w = wide.iter().find(|w| w[0] == row[1]).unwrap();
        let col = wide[0].iter().position(|h| h == &format!("rmse_{}", row[2]) || (h == "bound_min" && row[2] == "bound_min")).unwrap();
        assert_eq!(w[col], row[3]);
    }
}

#[test]
fn plot_table_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert!(matches!(emit_plotdata(&empty, dir.path()), Err(ExpError::SchemaMismatch(_))));
    let odd = dir.path().join("odd.csv");
    fs::write(&odd, "a,b,c\n1,2,3\n").unwrap();
    assert!(matches!(emit_plotdata(&odd, dir.path()), Err(ExpError::SchemaMismatch(_))));
}

#[test]
fn spectrum_rmse_writes_all_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(ExperimentKind::SpectrumRmse), dir.path(), None, false).unwrap();
    let rows = read_rows(&dir.path().join("spectrum_rmse.csv"));
    let labels: Vec<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(labels, ["mcrb", "aic", "aicc", "mdl", "bound_min"]);
    assert!(report.files.iter().any(|f| f.ends_with("plot_spectrum_rmse.csv")));
    assert!(report.files.iter().any(|f| f.ends_with("manifest.json")));
}

#[test]
fn infeasible_orders_are_recorded_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::SpectrumBound);
    cfg.sweep = vec![40.0];
    cfg.spectrum.as_mut().unwrap().orders = vec![2, 5, 20];
    run_experiment(&cfg, dir.path(), None, false).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let dropped = manifest["dropped_orders"].as_array().unwrap();
    assert_eq!(dropped.len(), 1);
    assert_eq!(dropped[0][1], 20);
    assert!(manifest.get("workers").is_none());
    let rows = read_rows(&dir.path().join("spectrum_bound.csv"));
    assert!(rows[1..].iter().all(|r| r[1] != "20"));
}

#[test]
fn doa_bound_minimum_sits_at_the_clutter_rank() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::preset(ExperimentKind::DoaBound);
    cfg.trials = 40;
    let report = run_experiment(&cfg, dir.path(), None, false).unwrap();
    assert!(report.table[0].ends_with("at m=6"), "{}", report.table[0]);
}

#[test]
fn degrees_only_change_the_printed_table() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::DoaRmseSnr);
    let rad = run_experiment(&cfg, a.path(), None, false).unwrap();
    let deg = run_experiment(&cfg, b.path(), None, true).unwrap();
    assert_ne!(rad.table, deg.table);
    assert!(deg.table[0].ends_with("(deg)"));
    let name = "doa_rmse_snr.csv";
    assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
}
