//! Recording run loop: executes `T` optimizer steps from the problem's
//! initial point and captures the full trajectory statistics.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

use super::RunSetup;
use crate::error::CoreError;
use crate::numkit::{l2_distance, l2_norm, SeededRng};
use crate::operators::PermutationEvent;
use crate::problems::{Objective, ProblemConfig};

/// Echo of everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfigEcho {
    pub setup: RunSetup,
    pub problem: Option<ProblemConfig>,
    pub t_max: usize,
    pub seed: u64,
}

/// Full recorded orbit of one run. All per-iteration lists share the same
/// length, which is `t_max` unless the run aborted early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub losses: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// `||x_t - x_{t-1}||` per iteration, including any permutation move.
    pub displacement_norms: Vec<f64>,
    pub permutation_events: Vec<PermutationEvent>,
    pub final_params: Vec<f64>,
    pub seed: u64,
    pub config: RunConfigEcho,
    /// Filled by callers that can measure time; never part of record
    /// comparisons.
    pub wall_time_seconds: f64,
    /// Per-iteration parameter snapshots, recorded on request (coverage
    /// analysis needs them and they are cheap only in low dimension).
    pub trajectory: Option<Vec<Vec<f64>>>,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.losses.len()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.losses.last().copied()
    }

    /// Equality over everything that is a pure function of (config, seed):
    /// wall time is excluded, and so is the config echo itself, which
    /// necessarily differs between two setups under comparison.
    pub fn same_trajectory(&self, other: &RunRecord) -> bool {
        self.losses == other.losses
            && self.grad_norms == other.grad_norms
            && self.displacement_norms == other.displacement_norms
            && self.permutation_events == other.permutation_events
            && self.final_params == other.final_params
            && self.seed == other.seed
            && self.trajectory == other.trajectory
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub record_trajectory: bool,
    /// Problem description echoed into the record; supplied by callers that
    /// construct problems from configs.
    pub problem_echo: Option<ProblemConfig>,
}

/// Run failure carrying whatever was recorded before the abort.
#[derive(Debug)]
pub enum RunError {
    /// The reported loss stopped being finite.
    NonFinite {
        iteration: usize,
        record: Box<RunRecord>,
    },
    /// An optimizer step failed.
    Step {
        iteration: usize,
        source: CoreError,
        record: Box<RunRecord>,
    },
    /// The run could not start.
    Setup(CoreError),
}

impl RunError {
    /// The partial record, when the run got far enough to have one.
    pub fn partial_record(&self) -> Option<&RunRecord> {
        match self {
            RunError::NonFinite { record, .. } | RunError::Step { record, .. } => Some(record),
            RunError::Setup(_) => None,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::NonFinite { iteration, .. } => {
                write!(f, "non-finite loss at iteration {iteration}")
            }
            RunError::Step {
                iteration, source, ..
            } => write!(f, "step failed at iteration {iteration}: {source}"),
            RunError::Setup(e) => write!(f, "run setup failed: {e}"),
        }
    }
}

impl core::error::Error for RunError {}

/// Executes `t_max` steps of `setup` on `problem`, fully reproducible from
/// `(setup, problem, seed)`.
pub fn run(
    setup: &RunSetup,
    problem: &dyn Objective,
    t_max: usize,
    seed: u64,
    options: &RunOptions,
) -> Result<RunRecord, RunError> {
    if t_max == 0 {
        return Err(RunError::Setup(CoreError::Parameter(
            "t_max must be at least 1".into(),
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut x = problem.initial_point(&mut rng);
    let mut optimizer = setup.build(problem).map_err(RunError::Setup)?;

    let echo = RunConfigEcho {
        setup: setup.clone(),
        problem: options.problem_echo.clone(),
        t_max,
        seed,
    };
    let mut record = RunRecord {
        losses: Vec::with_capacity(t_max),
        grad_norms: Vec::with_capacity(t_max),
        displacement_norms: Vec::with_capacity(t_max),
        permutation_events: Vec::new(),
        final_params: Vec::new(),
        seed,
        config: echo,
        wall_time_seconds: 0.0,
        trajectory: options.record_trajectory.then(Vec::new),
    };

    let mut prev_x = x.clone();
    for iteration in 1..=t_max {
        let outcome = match optimizer.step(problem, &mut x, iteration, &mut rng) {
            Ok(outcome) => outcome,
            Err(source) => {
                record.final_params = x;
                return Err(RunError::Step {
                    iteration,
                    source,
                    record: Box::new(record),
                });
            }
        };
        let loss = problem.metric(&x);
        if !loss.is_finite() {
            record.final_params = x;
            return Err(RunError::NonFinite {
                iteration,
                record: Box::new(record),
            });
        }
        record.losses.push(loss);
        record.grad_norms.push(l2_norm(&outcome.gradient));
        record.displacement_norms.push(l2_distance(&x, &prev_x));
        if let Some(event) = outcome.event {
            record.permutation_events.push(event);
        }
        if let Some(traj) = record.trajectory.as_mut() {
            traj.push(x.clone());
        }
        prev_x.copy_from_slice(&x);
    }
    record.final_params = x;
    Ok(record)
}
