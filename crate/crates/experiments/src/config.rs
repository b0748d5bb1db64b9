use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mcrb_core::ar::{ArmaModel, BMode, BiasEstimate, InnovationLaw, SpectrumCriterionOptions, SpectrumGrid};
use mcrb_core::doa::{design_signals, DoaCriterionOptions, Plugin, SelectionRule, UlaGeometry};
use mcrb_core::DoaScenario;
use serde::{Deserialize, Serialize};

use crate::error::{ExpError, ExpResult};

pub const OUT_ENV: &str = "MCRB_SELECT_OUT";
pub const DEFAULT_OUT: &str = "./out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "doa-bound")]
    DoaBound,
    #[serde(rename = "doa-rmse-snr")]
    DoaRmseSnr,
    #[serde(rename = "doa-rmse-T")]
    DoaRmseT,
    #[serde(rename = "spectrum-bound")]
    SpectrumBound,
    #[serde(rename = "spectrum-rmse")]
    SpectrumRmse,
    #[serde(rename = "selftest")]
    Selftest,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::DoaBound,
        ExperimentKind::DoaRmseSnr,
        ExperimentKind::DoaRmseT,
        ExperimentKind::SpectrumBound,
        ExperimentKind::SpectrumRmse,
        ExperimentKind::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::DoaBound => "doa-bound",
            ExperimentKind::DoaRmseSnr => "doa-rmse-snr",
            ExperimentKind::DoaRmseT => "doa-rmse-T",
            ExperimentKind::SpectrumBound => "spectrum-bound",
            ExperimentKind::SpectrumRmse => "spectrum-rmse",
            ExperimentKind::Selftest => "selftest",
        }
    }

    /// Name of the swept quantity, as written to the CSV files.
    pub fn sweep_var(self) -> &'static str {
        match self {
            ExperimentKind::DoaBound | ExperimentKind::DoaRmseSnr => "snr_db",
            ExperimentKind::DoaRmseT => "n_training",
            ExperimentKind::SpectrumBound | ExperimentKind::SpectrumRmse => "T",
            ExperimentKind::Selftest => "none",
        }
    }

    fn is_doa(self) -> bool {
        matches!(self, ExperimentKind::DoaBound | ExperimentKind::DoaRmseSnr | ExperimentKind::DoaRmseT)
    }

    fn is_spectrum(self) -> bool {
        matches!(self, ExperimentKind::SpectrumBound | ExperimentKind::SpectrumRmse)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
            format!("unknown experiment '{s}', expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PluginName {
    Pooled,
    CrossValidated,
    TargetResiduals,
    TrainingCovariance,
}

impl From<PluginName> for Plugin {
    fn from(p: PluginName) -> Self {
        match p {
            PluginName::Pooled => Plugin::Pooled,
            PluginName::CrossValidated => Plugin::CrossValidated,
            PluginName::TargetResiduals => Plugin::TargetResiduals,
            PluginName::TrainingCovariance => Plugin::TrainingCovariance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    OneStandardError,
    Argmin,
}

impl From<RuleName> for SelectionRule {
    fn from(r: RuleName) -> Self {
        match r {
            RuleName::OneStandardError => SelectionRule::OneStandardError,
            RuleName::Argmin => SelectionRule::Argmin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawName {
    Gaussian,
    Laplacian,
}

impl From<LawName> for InnovationLaw {
    fn from(l: LawName) -> Self {
        match l {
            LawName::Gaussian => InnovationLaw::Gaussian,
            LawName::Laplacian => InnovationLaw::Laplacian,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BModeName {
    PerSampleScore,
    ScoreOuterProduct,
}

impl From<BModeName> for BMode {
    fn from(b: BModeName) -> Self {
        match b {
            BModeName::PerSampleScore => BMode::PerSampleScore,
            BModeName::ScoreOuterProduct => BMode::ScoreOuterProduct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BiasName {
    Debiased,
    PlugIn,
}

impl From<BiasName> for BiasEstimate {
    fn from(b: BiasName) -> Self {
        match b {
            BiasName::Debiased => BiasEstimate::Debiased,
            BiasName::PlugIn => BiasEstimate::PlugIn,
        }
    }
}

/// Array and disturbance settings.
///
/// Under an SNR sweep the sweep value replaces `snr_db` and the INR moves
/// with it, keeping the configured gap `inr_db − snr_db`. Under a training
/// size sweep the sweep value replaces `n_training`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoaParams {
    pub n_sensors: usize,
    pub n_training: usize,
    pub n_target: usize,
    pub psi_target_deg: f64,
    pub clutter_dirs_deg: Vec<f64>,
    pub snr_db: f64,
    pub inr_db: f64,
    pub noise_power: f64,
    pub plugin: PluginName,
    pub rule: RuleName,
}

impl DoaParams {
    /// Scenario at one sweep point.
    pub fn scenario(&self, kind: ExperimentKind, sweep_value: f64) -> ExpResult<DoaScenario> {
        let (snr, inr, t) = match kind {
            ExperimentKind::DoaRmseT => (self.snr_db, self.inr_db, sweep_as_count(sweep_value)?),
            _ => (sweep_value, sweep_value + self.inr_db - self.snr_db, self.n_training),
        };
        let geometry = UlaGeometry::new(self.n_sensors)?;
        let signals = design_signals(self.n_target, snr, self.noise_power)?;
        let clutter_power = self.noise_power * 10f64.powf(inr / 10.0);
        let dirs = self.clutter_dirs_deg.iter().map(|d| d.to_radians()).collect();
        Ok(DoaScenario::new(geometry, self.psi_target_deg.to_radians(), signals, dirs, clutter_power, self.noise_power, t)?)
    }

    pub fn criterion_options(&self) -> DoaCriterionOptions<f64> {
        DoaCriterionOptions { plugin: self.plugin.into(), rule: self.rule.into(), ..Default::default() }
    }
}

/// Truth model and candidate orders for the spectral experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    /// AR coefficients `a₁..a_p` of `a(z) = 1 + Σ a_k z⁻ᵏ`.
    pub ar: Vec<f64>,
    /// MA taps `b₀..b_q`.
    pub ma: Vec<f64>,
    pub innov_var: f64,
    pub innovations: LawName,
    pub orders: Vec<usize>,
    pub grid_size: usize,
    /// Realization length and count behind each pseudo-true parameter.
    pub t_large: usize,
    pub k_pseudo: usize,
    pub b_mode: BModeName,
    pub bias: BiasName,
}

impl SpectrumParams {
    pub fn model(&self) -> ExpResult<ArmaModel<f64>> {
        Ok(ArmaModel::new(self.ar.clone(), self.ma.clone(), self.innov_var, self.innovations.into())?)
    }

    pub fn grid(&self) -> ExpResult<SpectrumGrid<f64>> {
        Ok(SpectrumGrid::uniform(self.grid_size)?)
    }

    pub fn criterion_options(&self) -> SpectrumCriterionOptions {
        SpectrumCriterionOptions { mode: self.b_mode.into(), bias: self.bias.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub sweep: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doa: Option<DoaParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumParams>,
}

pub(crate) fn sweep_as_count(v: f64) -> ExpResult<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(ExpError::Config(format!("sweep value {v} must be a positive integer")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> ExpResult<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> ExpResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ExpError::ConfigRead { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> ExpResult<()> {
        let bad = |msg: String| Err(ExpError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.trials >= u32::MAX as usize {
            return bad("trials must fit in 32 bits".into());
        }
        if self.experiment == ExperimentKind::Selftest {
            return Ok(());
        }
        if self.sweep.is_empty() {
            return bad("sweep must not be empty".into());
        }
        if let Some(v) = self.sweep.iter().find(|v| !v.is_finite()) {
            return bad(format!("sweep value {v} is not finite"));
        }
        if self.experiment.is_doa() {
            let Some(doa) = &self.doa else {
                return bad(format!("{} needs a \"doa\" block", self.experiment));
            };
            if self.spectrum.is_some() {
                return bad(format!("{} does not take a \"spectrum\" block", self.experiment));
            }
            for &v in &self.sweep {
                doa.scenario(self.experiment, v)?;
            }
        }
        if self.experiment.is_spectrum() {
            let Some(sp) = &self.spectrum else {
                return bad(format!("{} needs a \"spectrum\" block", self.experiment));
            };
            if self.doa.is_some() {
                return bad(format!("{} does not take a \"doa\" block", self.experiment));
            }
            sp.model()?;
            sp.grid()?;
            if sp.orders.is_empty() {
                return bad("orders must not be empty".into());
            }
            if sp.k_pseudo == 0 || sp.t_large == 0 {
                return bad("t_large and k_pseudo must be positive".into());
            }
            if let Some(&m) = sp.orders.iter().find(|&&m| sp.t_large <= 3 * m) {
                return bad(format!("t_large {} is too short for order {m}", sp.t_large));
            }
            for &v in &self.sweep {
                sweep_as_count(v)?;
            }
        }
        Ok(())
    }

    /// Output directory: the explicit override, then `MCRB_SELECT_OUT`, then
    /// the config, then `./out`.
    pub fn resolve_output_dir(&self, cli: Option<&Path>) -> PathBuf {
        if let Some(p) = cli {
            return p.to_path_buf();
        }
        if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(p);
        }
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }

    /// Settings used for the published figures, at desk-scale trial counts.
    pub fn preset(kind: ExperimentKind) -> Self {
        let doa = |snr: f64, inr: f64, sweep: Vec<f64>, trials| ExperimentConfig {
            experiment: kind,
            trials,
            master_seed: 20240601,
            output_dir: None,
            sweep,
            doa: Some(DoaParams {
                n_sensors: 11,
                n_training: 12,
                n_target: 10,
                psi_target_deg: 0.0,
                clutter_dirs_deg: vec![-46.0, -43.0, -40.0, 40.0, 43.0, 46.0],
                snr_db: snr,
                inr_db: inr,
                noise_power: 1.0,
                plugin: PluginName::Pooled,
                rule: RuleName::OneStandardError,
            }),
            spectrum: None,
        };
        let spectrum = |sweep: Vec<f64>| ExperimentConfig {
            experiment: kind,
            trials: 200,
            master_seed: 20240601,
            output_dir: None,
            sweep,
            doa: None,
            spectrum: Some(SpectrumParams {
                ar: vec![],
                ma: vec![1.0 / 6.0; 6],
                innov_var: 1.0,
                innovations: LawName::Laplacian,
                orders: vec![5, 10, 20, 40, 80],
                grid_size: 1000,
                t_large: 100_000,
                k_pseudo: 50,
                b_mode: BModeName::PerSampleScore,
                bias: BiasName::Debiased,
            }),
        };
        match kind {
            ExperimentKind::DoaBound => doa(30.0, 45.0, vec![30.0], 500),
            ExperimentKind::DoaRmseSnr => doa(30.0, 45.0, (0..=15).map(|i| 2.0 * i as f64).collect(), 500),
            ExperimentKind::DoaRmseT => doa(15.0, 30.0, vec![4.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0], 500),
            ExperimentKind::SpectrumBound => spectrum(vec![500.0, 2000.0, 8000.0]),
            ExperimentKind::SpectrumRmse => spectrum(vec![500.0, 2000.0, 8000.0]),
            ExperimentKind::Selftest => ExperimentConfig {
                experiment: kind,
                trials: 1,
                master_seed: 0,
                output_dir: None,
                sweep: vec![],
                doa: None,
                spectrum: None,
            },
        }
    }
}
