//! Experiment plans loaded from TOML config files.
//!
//! A config has three sections. `[timing]` and `[noise]` override the
//! default protocol schedule and noise model field by field; `[plan]`
//! names the run mode, its inputs and statistics, and the mandatory seed
//! (runs never seed from the wall clock). See `configs/calibrated.toml`
//! for a complete, validated example.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polarization::{FiducialState, PolarizationState};
use crate::sim::{NoiseParams, ProtocolTiming};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    // toml errors carry line/column context in their Display output.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid plan: {0}")]
    Invalid(String),
}

/// Run modes of the batch runner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    /// Six-fiducial tomography table.
    Fiducials,
    /// Zenith-angle sweep with sinusoid fits.
    ThetaSweep,
    /// Conditional autocorrelation behind the balanced analyzer.
    G2,
    /// Photonic concurrence of the dual-rail state.
    Concurrence,
    /// Herald probability and success-rate arithmetic only.
    RateProjection,
    /// Raw trial run writing the record stream.
    Run,
}

/// One input polarization, either a fiducial tag or explicit angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    Fiducial(FiducialState),
    Angles { theta: f64, phi: f64 },
}

impl InputSpec {
    pub fn state(&self) -> PolarizationState {
        match self {
            InputSpec::Fiducial(f) => f.state(),
            InputSpec::Angles { theta, phi } => PolarizationState::new(*theta, *phi),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InputSpec::Fiducial(f) => f.label().to_string(),
            InputSpec::Angles { theta, phi } => format!("theta={theta:.4},phi={phi:.4}"),
        }
    }

    /// Fiducial target this input corresponds to, when it is one.
    pub fn fiducial(&self) -> Option<FiducialState> {
        match self {
            InputSpec::Fiducial(f) => Some(*f),
            InputSpec::Angles { .. } => None,
        }
    }
}

fn default_inputs() -> Vec<InputSpec> {
    FiducialState::ALL
        .iter()
        .map(|&f| InputSpec::Fiducial(f))
        .collect()
}

fn default_thetas() -> Vec<f64> {
    // Ten evenly spaced zenith angles across [0, pi/2].
    (0..10)
        .map(|i| i as f64 * std::f64::consts::FRAC_PI_2 / 9.0)
        .collect()
}

fn default_reads_per_basis() -> u64 {
    70_000
}

fn default_background_windows() -> u64 {
    700_000
}

fn default_trials() -> u64 {
    4_000_000
}

fn default_condition() -> bool {
    true
}

fn default_trials_per_second() -> f64 {
    2e4
}

/// The `[plan]` section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub mode: PlanMode,
    /// Mandatory seed; there is no wall-clock fallback.
    pub seed: u64,
    /// Input polarizations (tomography-style modes).
    #[serde(default = "default_inputs")]
    pub inputs: Vec<InputSpec>,
    /// Zenith angles for theta-sweep mode (φ = 0).
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    /// Heralded read windows per (state, basis) in tomography modes.
    #[serde(default = "default_reads_per_basis")]
    pub reads_per_basis: u64,
    /// Herald-suppressed windows per basis for the background acquisition.
    #[serde(default = "default_background_windows")]
    pub background_windows_per_basis: u64,
    /// Trials for g2/concurrence balanced runs and for run mode.
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Condition trials on a successful herald (tomography acquisition);
    /// when false, heralds are Bernoulli-sampled at the physical rate.
    #[serde(default = "default_condition")]
    pub condition_on_herald: bool,
    /// Exchange the two analyzer output ports (systematic check).
    #[serde(default)]
    pub flip_ports: bool,
    /// Trial rate for rate-projection mode.
    #[serde(default = "default_trials_per_second")]
    pub trials_per_second: f64,
    /// Analyze an existing record file instead of simulating (g2 mode).
    #[serde(default)]
    pub records: Option<PathBuf>,
    /// Analyze a standalone count table instead of simulating
    /// (fiducials mode; the first input is the target state).
    #[serde(default)]
    pub counts: Option<PathBuf>,
    /// Signal/background acquisition ratio for external count tables.
    #[serde(default)]
    pub background_norm: Option<f64>,
    /// Default output directory, overridden by --out.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

/// Whole config file: timing and noise overrides plus the plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub timing: TimingSection,
    #[serde(default = "NoiseParams::default")]
    pub noise: NoiseParams,
    pub plan: PlanSection,
}

/// The `[timing]` section; fields default to the standard schedule derived
/// from the Larmor period.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingSection {
    pub tau_l: f64,
    pub write_duration: f64,
    pub read_duration: f64,
    pub trials_per_sequence: u64,
    /// Explicit write time; defaults to τ_L/2.
    pub t_w: Option<f64>,
    /// Explicit read time; defaults to t_w + τ_L/4.
    pub t_r: Option<f64>,
}

impl Default for TimingSection {
    fn default() -> Self {
        let t = ProtocolTiming::default();
        Self {
            tau_l: t.tau_l,
            write_duration: t.write_duration,
            read_duration: t.read_duration,
            trials_per_sequence: t.trials_per_sequence,
            t_w: None,
            t_r: None,
        }
    }
}

impl TimingSection {
    pub fn to_timing(&self) -> ProtocolTiming {
        let mut t = ProtocolTiming::from_larmor_period(self.tau_l);
        t.write_duration = self.write_duration;
        t.read_duration = self.read_duration;
        t.trials_per_sequence = self.trials_per_sequence;
        if let Some(t_w) = self.t_w {
            t.t_w = t_w;
            t.t_r = t_w + self.tau_l / 4.0;
        }
        if let Some(t_r) = self.t_r {
            t.t_r = t_r;
        }
        t
    }
}

impl Config {
    /// Load and validate a TOML config file.
    pub fn load(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let config: Config = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn timing(&self) -> ProtocolTiming {
        self.timing.to_timing()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.timing()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.noise
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let plan = &self.plan;
        let simulates = !matches!(plan.mode, PlanMode::RateProjection);
        if simulates {
            match plan.mode {
                PlanMode::G2 | PlanMode::Concurrence | PlanMode::Run => {
                    if plan.trials == 0 && plan.records.is_none() {
                        return Err(ConfigError::Invalid(
                            "trials must be positive for simulation modes".into(),
                        ));
                    }
                }
                _ => {
                    if plan.reads_per_basis == 0 && plan.counts.is_none() {
                        return Err(ConfigError::Invalid(
                            "reads_per_basis must be positive for tomography modes".into(),
                        ));
                    }
                }
            }
        }
        if plan.inputs.is_empty() {
            return Err(ConfigError::Invalid("inputs must not be empty".into()));
        }
        if plan.mode == PlanMode::ThetaSweep && plan.thetas.len() < 5 {
            return Err(ConfigError::Invalid(format!(
                "theta-sweep needs at least 5 theta values, got {}",
                plan.thetas.len()
            )));
        }
        if let Some(norm) = plan.background_norm {
            if norm < 0.0 {
                return Err(ConfigError::Invalid(
                    "background_norm must be non-negative".into(),
                ));
            }
        }
        if !(plan.trials_per_second >= 0.0) {
            return Err(ConfigError::Invalid(
                "trials_per_second must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(mode: &str) -> String {
        format!("[plan]\nmode = \"{mode}\"\nseed = 7\n")
    }

    #[test]
    fn minimal_configs_parse_with_defaults() {
        for mode in [
            "fiducials",
            "theta-sweep",
            "g2",
            "concurrence",
            "rate-projection",
            "run",
        ] {
            let cfg: Config = toml::from_str(&minimal(mode)).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.plan.seed, 7);
            assert_eq!(cfg.plan.inputs.len(), 6);
            assert!(cfg.plan.condition_on_herald);
            assert_eq!(cfg.noise, NoiseParams::default());
        }
    }

    #[test]
    fn seed_is_mandatory() {
        let err = toml::from_str::<Config>("[plan]\nmode = \"g2\"\n").unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn sections_override_defaults() {
        let text = r#"
            [timing]
            tau_l = 4e-6

            [noise]
            mu_bg = 0.08
            t2 = 1e-3

            [plan]
            mode = "fiducials"
            seed = 3
            inputs = ["H", { theta = 0.7, phi = 0.1 }]
            reads_per_basis = 500
        "#;
        let cfg: Config = toml::from_str(text).unwrap();
        cfg.validate().unwrap();
        let timing = cfg.timing();
        assert_eq!(timing.tau_l, 4e-6);
        assert_eq!(timing.t_w, 2e-6);
        assert_eq!(timing.t_r, 3e-6);
        assert_eq!(cfg.noise.mu_bg, 0.08);
        assert_eq!(cfg.plan.inputs[0].label(), "H");
        assert!(cfg.plan.inputs[1].fiducial().is_none());
    }

    #[test]
    fn background_model_variants_parse() {
        use crate::sim::BackgroundModel;
        let text = "[noise]\nbackground = { circular-bias = { coupling = 0.6 } }\n\n\
                    [plan]\nmode = \"g2\"\nseed = 1\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert_eq!(
            cfg.noise.background,
            BackgroundModel::CircularBias { coupling: 0.6 }
        );
        let text = "[noise]\nbackground = \"unpolarized\"\n\n[plan]\nmode = \"g2\"\nseed = 1\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert_eq!(cfg.noise.background, BackgroundModel::Unpolarized);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = "[plan]\nmode = \"g2\"\nseed = 1\nbogus = 3\n";
        assert!(toml::from_str::<Config>(text).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[plan]\nmode = \"g2\"\nseed = \"not a number\"\n").unwrap();
        let err = Config::load(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn sweep_needs_five_thetas() {
        let text = "[plan]\nmode = \"theta-sweep\"\nseed = 1\nthetas = [0.1, 0.2]\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn zero_trials_invalid_for_simulation() {
        let text = "[plan]\nmode = \"g2\"\nseed = 1\ntrials = 0\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert!(cfg.validate().is_err());

        // rate-projection does not simulate.
        let text = "[plan]\nmode = \"rate-projection\"\nseed = 1\ntrials = 0\n";
        let cfg: Config = toml::from_str(text).unwrap();
        assert!(cfg.validate().is_ok());
    }
}
