use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::AgentParams;
use crate::bandit::NormalizationBounds;
use crate::envs::AdviceKind;
use crate::error::{Error, Result};
use crate::forecaster::TrainingConfig;
use crate::policies::{PolicyKind, PolicyParams};

/// Experiment configs shipped with the binary, by name.
pub const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    ("rising_bandit", include_str!("../../configs/rising_bandit.toml")),
    ("grid_friendly", include_str!("../../configs/grid_friendly.toml")),
    ("grid_friendly_upies", include_str!("../../configs/grid_friendly_upies.toml")),
    ("grid_good", include_str!("../../configs/grid_good.toml")),
    ("grid_adversarial", include_str!("../../configs/grid_adversarial.toml")),
];

pub fn bundled_config(name: &str) -> Option<&'static str> {
    BUNDLED_CONFIGS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub horizon: u32,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvSpec {
    RisingBandit {
        y_max: f64,
        #[serde(default = "yes")]
        noise: bool,
    },
    GridWorld {
        #[serde(default)]
        advice: AdviceKind,
        #[serde(default = "default_max_steps")]
        max_steps: u32,
    },
}

fn yes() -> bool {
    true
}

fn default_max_steps() -> u32 {
    2000
}

impl EnvSpec {
    pub fn default_bounds(&self) -> NormalizationBounds {
        match self {
            EnvSpec::RisingBandit { .. } => NormalizationBounds::UNIT,
            EnvSpec::GridWorld { max_steps, .. } => {
                NormalizationBounds::new(-0.1 * f64::from(*max_steps), 96.0).expect("static bounds")
            }
        }
    }

    fn label(&self) -> String {
        match self {
            EnvSpec::RisingBandit { y_max, .. } => format!("y{y_max}"),
            EnvSpec::GridWorld { advice, .. } => format!("{advice:?}").to_ascii_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySection {
    pub kind: PolicyKind,
    #[serde(flatten)]
    pub params: PolicyParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub r_min: f64,
    pub r_max: f64,
}

/// Optional grid expansion used by `sweep`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub policies: Vec<PolicyKind>,
    pub advice: Vec<AdviceKind>,
    pub y_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub env: EnvSpec,
    pub policy: PolicySection,
    #[serde(default)]
    pub agent: AgentParams,
    #[serde(default)]
    pub forecaster: TrainingConfig,
    #[serde(default)]
    pub normalization: Option<BoundsSection>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file. A path without extension falls back to the
    /// same path with `.toml` appended.
    pub fn load(path: &Path) -> Result<Self> {
        let resolved = if path.is_file() {
            path.to_path_buf()
        } else {
            let with_ext = path.with_extension("toml");
            if path.extension().is_none() && with_ext.is_file() {
                with_ext
            } else {
                return Err(Error::ConfigNotFound(path.to_path_buf()));
            }
        };
        let text =
            std::fs::read_to_string(&resolved).map_err(|source| Error::Io { path: resolved.clone(), source })?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        if e.name.is_empty() || e.name.contains(['/', '\\']) {
            return Err(Error::Config("experiment name must be a non-empty file stem".into()));
        }
        if e.horizon == 0 {
            return Err(Error::Config("experiment horizon must be >= 1".into()));
        }
        if e.seeds.is_empty() {
            return Err(Error::Config("experiment seeds must be non-empty".into()));
        }
        match &self.env {
            EnvSpec::RisingBandit { y_max, .. } if !y_max.is_finite() => {
                return Err(Error::Config("y_max must be finite".into()))
            }
            EnvSpec::GridWorld { max_steps: 0, .. } => return Err(Error::Config("max_steps must be >= 1".into())),
            _ => {}
        }
        self.policy.params.validate()?;
        self.agent.validate()?;
        self.forecaster.validate()?;
        self.bounds()?;
        Ok(())
    }

    pub fn bounds(&self) -> Result<NormalizationBounds> {
        match self.normalization {
            Some(b) => NormalizationBounds::new(b.r_min, b.r_max),
            None => Ok(self.env.default_bounds()),
        }
    }

    /// Expands the `[sweep]` section into one config per combination. A
    /// config without one expands to itself.
    pub fn expand_sweep(&self) -> Vec<ExperimentConfig> {
        let Some(sweep) = &self.sweep else {
            return vec![self.clone()];
        };
        let policies = if sweep.policies.is_empty() { vec![self.policy.kind] } else { sweep.policies.clone() };
        let envs: Vec<EnvSpec> = match &self.env {
            EnvSpec::RisingBandit { y_max, noise } => {
                let ys = if sweep.y_max.is_empty() { vec![*y_max] } else { sweep.y_max.clone() };
                ys.into_iter().map(|y_max| EnvSpec::RisingBandit { y_max, noise: *noise }).collect()
            }
            EnvSpec::GridWorld { advice, max_steps } => {
                let kinds = if sweep.advice.is_empty() { vec![*advice] } else { sweep.advice.clone() };
                kinds.into_iter().map(|advice| EnvSpec::GridWorld { advice, max_steps: *max_steps }).collect()
            }
        };
        let mut out = Vec::new();
        for env in &envs {
            for &kind in &policies {
                let mut cfg = self.clone();
                cfg.sweep = None;
                cfg.experiment.name = format!("{}__{}__{}", self.experiment.name, env.label(), kind);
                cfg.env = env.clone();
                cfg.policy.kind = kind;
                out.push(cfg);
            }
        }
        out
    }
}
