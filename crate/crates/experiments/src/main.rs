use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mcrb_select::{run_experiment, ExpError, ExperimentConfig, ExperimentKind};

/// Monte Carlo experiments for MCRB-based model order selection.
#[derive(Debug, Parser)]
#[command(name = "mcrb-select", version)]
struct Cli {
    /// doa-bound, doa-rmse-snr, doa-rmse-T, spectrum-bound, spectrum-rmse or selftest
    experiment: ExperimentKind,
    /// JSON config file (not needed for selftest).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; takes precedence over MCRB_SELECT_OUT and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print DOA errors in degrees. Files always hold radians.
    #[arg(long)]
    degrees: bool,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ExpError> {
    let mut cfg = match (&cli.config, cli.experiment) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, ExperimentKind::Selftest) => ExperimentConfig::preset(ExperimentKind::Selftest),
        (None, kind) => return Err(ExpError::Config(format!("{kind} needs --config <file>"))),
    };
    if cfg.experiment != cli.experiment {
        return Err(ExpError::Config(format!("config is for {} but {} was requested", cfg.experiment, cli.experiment)));
    }
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| {
        let out = cfg.resolve_output_dir(cli.out.as_deref());
        run_experiment(&cfg, &out, cli.workers, cli.degrees)
    });
    match result {
        Ok(report) => {
            for line in &report.table {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            let selftest_failed = cli.experiment == ExperimentKind::Selftest && report.table.iter().any(|l| l.starts_with("FAIL"));
            if selftest_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
