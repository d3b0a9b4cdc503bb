//! Experiment configuration: the JSON schema, the optimizer registry, and
//! validation.

use std::env;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use permutopt_core::optimizers::{
    AdamVariant, OptimizerConfig, PermutationScope, RandomizationConfig, RunSetup,
};
use permutopt_core::problems::ProblemConfig;

use crate::error::HarnessError;

/// Environment variable that replaces the config's seed list, for CI smoke
/// runs.
pub const SEED_OVERRIDE_ENV: &str = "PERMUTOPT_SEED";

pub const REGISTERED_METHODS: &str = "gd, adam, svrg, admm";

/// One problem in an experiment, optionally named for artifact paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: ProblemConfig,
}

impl ProblemEntry {
    pub fn display_name(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.spec.kind().to_string())
    }
}

/// One optimizer in an experiment. `method` must name a registered
/// implementation; unset hyperparameters take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_num: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<AdamVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_iters: Option<usize>,
    #[serde(default)]
    pub randomized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<PermutationScope>,
}

impl OptimizerSpec {
    /// Resolves the method name against the registry and assembles the
    /// concrete run setup.
    pub fn resolve(&self) -> Result<RunSetup, HarnessError> {
        let optimizer = match self.method.as_str() {
            "gd" => OptimizerConfig::Gd {
                alpha: self.alpha.unwrap_or(0.01),
            },
            "adam" => OptimizerConfig::Adam {
                alpha: self.alpha.unwrap_or(0.001),
                beta1: self.beta1.unwrap_or(0.9),
                beta2: self.beta2.unwrap_or(0.999),
                eps_num: self.eps_num.unwrap_or(1e-8),
                variant: self.variant.unwrap_or_default(),
            },
            "svrg" => OptimizerConfig::Svrg {
                alpha: self.alpha.unwrap_or(0.01),
                epoch_length: self.epoch_length,
            },
            "admm" => OptimizerConfig::Admm {
                rho: self.rho.unwrap_or(1.0),
                inner_alpha: self.inner_alpha.unwrap_or(0.05),
                inner_iters: self.inner_iters.unwrap_or(1),
            },
            other => {
                return Err(HarnessError::UnknownOptimizer {
                    name: other.to_string(),
                    valid: REGISTERED_METHODS,
                })
            }
        };
        let randomization = if self.randomized {
            Some(RandomizationConfig {
                threshold: self.trigger_threshold.unwrap_or(1e-2),
                scope: self.scope.unwrap_or_default(),
            })
        } else {
            None
        };
        let label = self.label.clone().unwrap_or_else(|| {
            if self.randomized {
                format!("randomized-{}", self.method)
            } else {
                self.method.clone()
            }
        });
        Ok(RunSetup {
            label,
            optimizer,
            randomization,
        })
    }
}

fn default_t_max() -> usize {
    2000
}

fn default_output_dir() -> String {
    "out".to_string()
}

fn default_coverage_cells() -> usize {
    50
}

fn default_icc_final_k() -> usize {
    10
}

/// Post-run analysis switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisToggles {
    pub coverage: bool,
    pub icc: bool,
    pub contraction: bool,
    pub coverage_cells: usize,
    pub coverage_delta: Option<f64>,
    pub icc_final_k: usize,
}

impl Default for AnalysisToggles {
    fn default() -> Self {
        AnalysisToggles {
            coverage: false,
            icc: false,
            contraction: false,
            coverage_cells: default_coverage_cells(),
            coverage_delta: None,
            icc_final_k: default_icc_final_k(),
        }
    }
}

fn one_or_many<'de, D>(deserializer: D) -> Result<Vec<ProblemEntry>, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(Box<ProblemEntry>),
        Many(Vec<ProblemEntry>),
    }
    Ok(match OneOrMany::deserialize(deserializer)? {
        OneOrMany::One(p) => vec![*p],
        OneOrMany::Many(v) => v,
    })
}

/// A full experiment: problems x optimizers x seeds, plus analysis
/// toggles. Round-trips losslessly through its JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// One problem or a list; the JSON key may be `problems` or `problem`.
    #[serde(alias = "problem", deserialize_with = "one_or_many")]
    pub problems: Vec<ProblemEntry>,
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default)]
    pub analysis: AnalysisToggles,
}

impl ExperimentConfig {
    pub fn from_str_validated(text: &str, path: &Path) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| HarnessError::ConfigParse {
                path: path.to_path_buf(),
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        config.validate(path)?;
        Ok(config)
    }

    fn validate(&self, path: &Path) -> Result<(), HarnessError> {
        let invalid = |message: String| HarnessError::ConfigInvalid {
            path: path.to_path_buf(),
            message,
        };
        if self.problems.is_empty() {
            return Err(invalid("at least one problem is required".into()));
        }
        if self.optimizers.is_empty() {
            return Err(invalid("at least one optimizer is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required".into()));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max must be at least 1".into()));
        }
        let mut labels = std::collections::BTreeSet::new();
        for spec in &self.optimizers {
            let setup = spec.resolve()?;
            if !labels.insert(setup.label.clone()) {
                return Err(invalid(format!("duplicate optimizer label '{}'", setup.label)));
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for entry in &self.problems {
            if !names.insert(entry.display_name()) {
                return Err(invalid(format!(
                    "duplicate problem name '{}'",
                    entry.display_name()
                )));
            }
        }
        Ok(())
    }
}

/// Reads, parses, and validates a config file, applying the
/// `PERMUTOPT_SEED` override when set.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut config = ExperimentConfig::from_str_validated(&text, path)?;
    if let Ok(seed_text) = env::var(SEED_OVERRIDE_ENV) {
        let seed: u64 = seed_text
            .trim()
            .parse()
            .map_err(|_| HarnessError::ConfigInvalid {
                path: path.to_path_buf(),
                message: format!("{SEED_OVERRIDE_ENV}='{seed_text}' is not a valid seed"),
            })?;
        config.seeds = vec![seed];
    }
    Ok(config)
}
