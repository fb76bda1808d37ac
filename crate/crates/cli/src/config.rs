//! Run configuration: one JSON document, optionally overridden by flags.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qimd_core::working_point::InterferometerKind;
use qimd_core::{InterferometerSpec, NoiseChannel, PhotonStatistics, ScanPlan, SweepGrid};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Analytic,
    Wp,
    Mc,
    Sweep,
    Tables,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Phase distillation over the plan's settings.
    #[default]
    Distillation,
    /// Fringe inversion at one probe phase.
    WorkingPoint,
    /// Raw detected-count moments at each setting.
    Counts,
}

fn default_trials() -> usize {
    10_000
}

fn default_true_phase() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default)]
    pub experiment: Experiment,
    /// Shots `R` averaged per setting and trial.
    pub shots: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Hidden object phase for distillation and count experiments.
    #[serde(default = "default_true_phase")]
    pub true_phase: f64,
    /// Probe phase for the working-point experiment; the located working
    /// point when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_phase: Option<f64>,
    /// Explicit phases for the count experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<Vec<f64>>,
}

fn default_kind() -> InterferometerKind {
    InterferometerKind::Nli
}

fn thermal() -> PhotonStatistics {
    PhotonStatistics::Thermal
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_kind")]
    pub kind: InterferometerKind,
    pub eta_axis: Vec<f64>,
    pub n0_axis: Vec<f64>,
    #[serde(default = "thermal")]
    pub noise_stats: PhotonStatistics,
    /// Measurements behind the shot-noise boundary; the plan's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_steps: Option<usize>,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<SweepGrid, CliError> {
        Ok(SweepGrid::new(
            self.eta_axis.clone(),
            self.n0_axis.clone(),
            self.noise_stats,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<InterferometerSpec>,
    #[serde(default)]
    pub noise: NoiseChannel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<ScanPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Flag values that take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    /// Parses a document; blank input yields the default configuration.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim().is_empty() {
            return Ok(RunConfig::default());
        }
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Binds the configuration to `subcommand`, applies flag overrides and
    /// validates every nested value.
    pub fn resolve(
        mut self,
        subcommand: Subcommand,
        overrides: &Overrides,
    ) -> Result<Self, CliError> {
        match self.subcommand {
            Some(s) if s != subcommand => {
                return Err(CliError::Config(format!(
                    "config is for subcommand {s:?}, invoked as {subcommand:?}"
                )))
            }
            _ => self.subcommand = Some(subcommand),
        }
        if let Some(seed) = overrides.seed {
            if let Some(mc) = self.mc.as_mut() {
                mc.seed = Some(seed);
            }
        }
        if overrides.out.is_some() {
            self.output.path = overrides.out.clone();
        }
        if overrides.format.is_some() {
            self.output.format = overrides.format;
        }
        self.validate(subcommand)?;
        Ok(self)
    }

    fn validate(&self, subcommand: Subcommand) -> Result<(), CliError> {
        if let Some(spec) = &self.spec {
            spec.validate()?;
        }
        self.noise.validate()?;
        if let Some(plan) = &self.plan {
            plan.validate()?;
        }
        let needs_model = matches!(
            subcommand,
            Subcommand::Analytic | Subcommand::Wp | Subcommand::Mc
        );
        if needs_model {
            self.spec()?;
            self.plan()?;
        }
        match subcommand {
            Subcommand::Mc => {
                let mc = self.mc()?;
                if mc.seed.is_none() {
                    return Err(CliError::Config(
                        "mc requires a seed (config or --seed)".into(),
                    ));
                }
                if mc.shots == 0 || mc.trials < 2 {
                    return Err(CliError::Config(
                        "mc needs shots >= 1 and trials >= 2".into(),
                    ));
                }
            }
            Subcommand::Sweep => {
                let grid = self.grid()?;
                grid.grid()?;
                self.plan()?.require_distillation()?;
                if grid.boundary_steps == Some(0) {
                    return Err(CliError::Config("boundary_steps must be >= 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<&InterferometerSpec, CliError> {
        self.spec
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `spec`".into()))
    }

    pub fn plan(&self) -> Result<&ScanPlan, CliError> {
        self.plan
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `plan`".into()))
    }

    pub fn mc(&self) -> Result<&McConfig, CliError> {
        self.mc
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `mc`".into()))
    }

    pub fn grid(&self) -> Result<&SweepConfig, CliError> {
        self.grid
            .as_ref()
            .ok_or_else(|| CliError::Config("missing field `grid`".into()))
    }

    /// Canonical serialisation: compact JSON in declaration order.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical serialisation, hex encoded. The output
    /// path is left out so the same run hashes alike wherever it is written.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.output.path = None;
        hex::encode(Sha256::digest(keyed.canonical_json().as_bytes()))
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.output.format.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MC: &str = r#"{
        "spec": {"kind": "nli", "n0": 5, "n0p": 5},
        "noise": {"eta": 0.8, "mean_noise": 5, "stats": "thermal"},
        "plan": {"steps": 8},
        "mc": {"shots": 1000, "trials": 100, "seed": 3}
    }"#;

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::parse(MC)
            .unwrap()
            .resolve(Subcommand::Mc, &Overrides::default())
            .unwrap();
        let again = RunConfig::parse(&cfg.canonical_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn hash_ignores_output_path_only() {
        let cfg = RunConfig::parse(MC).unwrap();
        let mut moved = cfg.clone();
        moved.output.path = Some("elsewhere.json".into());
        assert_eq!(cfg.hash(), moved.hash());
        moved.output.format = Some(Format::Csv);
        assert_ne!(cfg.hash(), moved.hash());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::parse(
            r#"{"spec": {"kind": "mzi", "n0": 1, "t1": 0.5, "t2": 0.5, "x": 1}}"#
        )
        .is_err());
        assert!(RunConfig::parse(r#"{"plot": true}"#).is_err());
        assert!(RunConfig::parse(r#"{"plan": {"steps": 3, "jitter": 0.1}}"#).is_err());
    }

    #[test]
    fn flags_override_document() {
        let overrides = Overrides {
            seed: Some(99),
            out: Some("x.json".into()),
            format: Some(Format::Csv),
        };
        let cfg = RunConfig::parse(MC)
            .unwrap()
            .resolve(Subcommand::Mc, &overrides)
            .unwrap();
        assert_eq!(cfg.mc.unwrap().seed, Some(99));
        assert_eq!(cfg.output.path.unwrap(), PathBuf::from("x.json"));
        assert_eq!(cfg.output.format, Some(Format::Csv));
    }

    #[test]
    fn mc_requires_seed() {
        let text = MC.replace(r#", "seed": 3"#, "");
        let cfg = RunConfig::parse(&text).unwrap();
        assert!(matches!(
            cfg.clone().resolve(Subcommand::Mc, &Overrides::default()),
            Err(CliError::Config(_))
        ));
        let o = Overrides {
            seed: Some(1),
            ..Overrides::default()
        };
        assert!(cfg.resolve(Subcommand::Mc, &o).is_ok());
    }

    #[test]
    fn subcommand_must_match() {
        let cfg = RunConfig::parse(r#"{"subcommand": "sweep"}"#).unwrap();
        assert!(cfg
            .resolve(Subcommand::Tables, &Overrides::default())
            .is_err());
    }

    #[test]
    fn blank_input_is_default() {
        assert_eq!(RunConfig::parse("  \n").unwrap(), RunConfig::default());
        assert!(RunConfig::default()
            .resolve(Subcommand::Tables, &Overrides::default())
            .is_ok());
        assert!(RunConfig::default()
            .resolve(Subcommand::Analytic, &Overrides::default())
            .is_err());
    }

    #[test]
    fn invalid_nested_values_are_config_errors() {
        let bad =
            r#"{"spec": {"kind": "mzi", "n0": 1, "t1": 1.5, "t2": 0.5}, "plan": {"steps": 5}}"#;
        let err = RunConfig::parse(bad)
            .unwrap()
            .resolve(Subcommand::Analytic, &Overrides::default());
        assert_eq!(err.unwrap_err().exit_code(), 2);
    }
}
