//! Step-oriented optimizers behind one interface, the permutation wrapper
//! that composes with any of them, and the recording run loop.

mod adam;
mod admm;
mod gd;
mod randomized;
mod runner;
mod svrg;

pub use adam::{adam_step, AdamOptimizer, AdamState, AdamVariant};
pub use admm::{admm_dnmf_step, soft_threshold, AdmmDnmfOptimizer, AdmmDnmfState};
pub use gd::{gd_step, GdOptimizer};
pub use randomized::RandomizedOptimizer;
pub use runner::{run, RunConfigEcho, RunError, RunOptions, RunRecord};
pub use svrg::{svrg_step, SvrgOptimizer, SvrgState};

use alloc::boxed::Box;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::numkit::SeededRng;
use crate::operators::{PermutationEvent, TriggerPolicy};
use crate::problems::Objective;

/// Result of one optimizer iteration: the gradient that drove the update
/// and, for randomized wrappers, the permutation applied afterwards.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub gradient: Vec<f64>,
    pub event: Option<PermutationEvent>,
}

impl StepOutcome {
    pub fn plain(gradient: Vec<f64>) -> Self {
        StepOutcome {
            gradient,
            event: None,
        }
    }
}

/// One optimization step over a flat parameter vector.
///
/// Implementations own their mutable state exclusively; the objective is
/// read-only and the rng is the run's single deterministic stream.
pub trait Optimizer: Send {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError>;
}

fn default_gd_alpha() -> f64 {
    0.01
}

fn default_adam_alpha() -> f64 {
    0.001
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_eps_num() -> f64 {
    1e-8
}

fn default_rho() -> f64 {
    1.0
}

fn default_inner_alpha() -> f64 {
    0.05
}

fn default_inner_iters() -> usize {
    1
}

/// Declarative optimizer description; `method` is the serialized tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerConfig {
    Gd {
        #[serde(default = "default_gd_alpha")]
        alpha: f64,
    },
    Adam {
        #[serde(default = "default_adam_alpha")]
        alpha: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps_num")]
        eps_num: f64,
        #[serde(default)]
        variant: AdamVariant,
    },
    Svrg {
        #[serde(default = "default_gd_alpha")]
        alpha: f64,
        /// Inner steps between snapshot refreshes; defaults to twice the
        /// problem's component count.
        #[serde(default)]
        epoch_length: Option<usize>,
    },
    Admm {
        #[serde(default = "default_rho")]
        rho: f64,
        #[serde(default = "default_inner_alpha")]
        inner_alpha: f64,
        #[serde(default = "default_inner_iters")]
        inner_iters: usize,
    },
}

impl OptimizerConfig {
    pub fn method_name(&self) -> &'static str {
        match self {
            OptimizerConfig::Gd { .. } => "gd",
            OptimizerConfig::Adam { .. } => "adam",
            OptimizerConfig::Svrg { .. } => "svrg",
            OptimizerConfig::Admm { .. } => "admm",
        }
    }

    /// Instantiates the optimizer for `problem`.
    pub fn build(&self, problem: &dyn Objective) -> Result<Box<dyn Optimizer>, CoreError> {
        match self {
            OptimizerConfig::Gd { alpha } => Ok(Box::new(GdOptimizer::new(*alpha)?)),
            OptimizerConfig::Adam {
                alpha,
                beta1,
                beta2,
                eps_num,
                variant,
            } => Ok(Box::new(AdamOptimizer::new(AdamState::new(
                problem.dim(),
                *alpha,
                *beta1,
                *beta2,
                *eps_num,
                *variant,
            )?))),
            OptimizerConfig::Svrg {
                alpha,
                epoch_length,
            } => {
                let epoch = epoch_length.unwrap_or(2 * problem.component_count().max(1));
                Ok(Box::new(SvrgOptimizer::new(problem.dim(), *alpha, epoch)?))
            }
            OptimizerConfig::Admm {
                rho,
                inner_alpha,
                inner_iters,
            } => {
                let dnmf = problem.as_dnmf().ok_or_else(|| {
                    CoreError::Parameter(
                        "admm requires a deep factorization problem".into(),
                    )
                })?;
                Ok(Box::new(AdmmDnmfOptimizer::new(
                    dnmf,
                    *rho,
                    *inner_alpha,
                    *inner_iters,
                )?))
            }
        }
    }
}

/// Whether the permutation acts on the whole flattened vector or block by
/// block (one fresh permutation per trainable matrix, composed into a single
/// recorded map).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationScope {
    #[default]
    Joint,
    PerBlock,
}

/// Randomization settings attached to a base optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationConfig {
    pub threshold: f64,
    #[serde(default)]
    pub scope: PermutationScope,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        RandomizationConfig {
            threshold: TriggerPolicy::default().threshold,
            scope: PermutationScope::Joint,
        }
    }
}

/// A fully-specified optimizer for one run: base method plus optional
/// permutation randomization, under a display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSetup {
    pub label: alloc::string::String,
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub randomization: Option<RandomizationConfig>,
}

impl RunSetup {
    pub fn plain(label: &str, optimizer: OptimizerConfig) -> Self {
        RunSetup {
            label: label.into(),
            optimizer,
            randomization: None,
        }
    }

    pub fn randomized(label: &str, optimizer: OptimizerConfig, threshold: f64) -> Self {
        RunSetup {
            label: label.into(),
            optimizer,
            randomization: Some(RandomizationConfig {
                threshold,
                scope: PermutationScope::Joint,
            }),
        }
    }

    /// Builds the optimizer stack, wrapping the base when randomization is
    /// configured.
    pub fn build(&self, problem: &dyn Objective) -> Result<Box<dyn Optimizer>, CoreError> {
        let base = self.optimizer.build(problem)?;
        match &self.randomization {
            Some(cfg) => Ok(Box::new(RandomizedOptimizer::new(
                base,
                TriggerPolicy::new(cfg.threshold)?,
                cfg.scope,
            ))),
            None => Ok(base),
        }
    }
}
