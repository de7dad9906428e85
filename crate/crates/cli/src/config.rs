//! Versioned JSON experiment configs.
//!
//! A config lists Monte-Carlo experiments. Resolution fills in everything a
//! re-run needs: each scenario without a seed gets one derived from the
//! global seed and the experiment's position, and each experiment without a
//! label gets `"<scenario> | <pipeline>"`. Resolving a resolved config is a
//! no-op.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use holp_core::simgen::{replicate_rng, Family, SimScenario};
use holp_core::PipelineSpec;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {found} (this build reads {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("duplicate experiment label '{0}'")]
    DuplicateLabel(String),
    #[error("experiment {index} ('{label}'): {source}")]
    Invalid {
        index: usize,
        label: String,
        #[source]
        source: holp_core::Error,
    },
}

/// What a probability curve plots on its y axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMetric {
    #[default]
    Inclusion,
    Separation,
    Coverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub design: Family,
    pub n: usize,
    pub p: usize,
    pub r_squared: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    pub fn with_seed(&self, seed: u64) -> SimScenario {
        SimScenario {
            design: self.design,
            n: self.n,
            p: self.p,
            r_squared: self.r_squared,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub scenario: ScenarioSpec,
    pub pipeline: PipelineSpec,
    pub replicates: usize,
    /// Curve this experiment contributes a point to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<CurveMetric>,
}

impl Experiment {
    fn default_label(&self) -> String {
        let s = &self.scenario;
        format!(
            "{} n={} p={} R2={} | {}",
            s.design.label(),
            s.n,
            s.p,
            s.r_squared,
            self.pipeline.label()
        )
    }

    /// The simulated scenario; only meaningful after resolution.
    pub fn sim_scenario(&self) -> SimScenario {
        self.scenario.with_seed(self.scenario.seed.expect("resolved config"))
    }

    pub fn resolved_label(&self) -> &str {
        self.label.as_deref().expect("resolved config")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub experiments: Vec<Experiment>,
}

/// Seed of the experiment at `index` when its scenario does not fix one:
/// the first output of ChaCha8 seeded with `global`, stream `index`.
pub fn derive_seed(global: u64, index: usize) -> u64 {
    replicate_rng(global, index as u64).next_u64()
}

impl ExperimentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            threads: None,
            out: None,
            experiments: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text)?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: config.schema_version,
            });
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fills seeds and labels and validates every experiment.
    pub fn resolve(&self) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        let mut seen = HashSet::new();
        for (index, e) in out.experiments.iter_mut().enumerate() {
            if e.scenario.seed.is_none() {
                e.scenario.seed = Some(derive_seed(self.seed, index));
            }
            if e.label.is_none() {
                e.label = Some(e.default_label());
            }
            let label = e.resolved_label().to_owned();
            let invalid = |source| ConfigError::Invalid {
                index,
                label: label.clone(),
                source,
            };
            e.sim_scenario().validate().map_err(invalid)?;
            if e.replicates == 0 {
                return Err(invalid(holp_core::Error::InvalidParameter {
                    name: "replicates",
                    reason: "need at least one replicate".into(),
                }));
            }
            if !seen.insert(label.clone()) {
                return Err(ConfigError::DuplicateLabel(label));
            }
        }
        Ok(out)
    }
}
