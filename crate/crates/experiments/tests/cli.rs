use std::fs;
use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mcrb-select"))
}

const SMALL_DOA: &str = r#"{
  "experiment": "doa-rmse-snr",
  "trials": 2,
  "master_seed": 7,
  "sweep": [20.0],
  "doa": {
    "n_sensors": 11, "n_training": 12, "n_target": 10, "psi_target_deg": 0.0,
    "clutter_dirs_deg": [-46.0, -43.0, -40.0, 40.0, 43.0, 46.0],
    "snr_db": 30.0, "inr_db": 45.0, "noise_power": 1.0,
    "plugin": "pooled", "rule": "one-standard-error"
  }
}"#;

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli().arg("selftest").current_dir(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0, "selftest writes no files");
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 8, "{text}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"experiment": "doa-rmse-snr", "trials": 0}"#).unwrap();
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["doa-rmse-snr".to_string(), "--config".into(), bad.display().to_string()],
        vec!["doa-rmse-snr".to_string(), "--config".into(), missing.display().to_string()],
        vec!["doa-rmse-snr".to_string()],
    ] {
        let out = cli().args(&args).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn mismatched_experiment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, SMALL_DOA).unwrap();
    let out = cli().args(["doa-bound", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runs_write_into_the_chosen_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, SMALL_DOA).unwrap();

    let env_out = dir.path().join("from_env");
    let out = cli().args(["doa-rmse-snr", "--config"]).arg(&cfg).env("MCRB_SELECT_OUT", &env_out).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(env_out.join("doa_rmse_snr.csv").is_file());
    assert!(env_out.join("plot_doa_rmse_snr.csv").is_file());
    assert!(env_out.join("manifest.json").is_file());

    let flag_out = dir.path().join("from_flag");
    let out = cli()
        .args(["doa-rmse-snr", "--seed", "7", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&flag_out)
        .env("MCRB_SELECT_OUT", &env_out)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(
        fs::read(flag_out.join("doa_rmse_snr.csv")).unwrap(),
        fs::read(env_out.join("doa_rmse_snr.csv")).unwrap()
    );
}
