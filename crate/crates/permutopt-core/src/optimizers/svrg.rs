//! Stochastic variance-reduced gradient.
//!
//! Classic two-loop scheme: a periodically refreshed snapshot supplies a
//! full gradient; inner steps follow one component gradient corrected by
//! the snapshot. The correction is accumulated as
//! `g_i(x) + (full(snapshot) - g_i(snapshot))` so that on single-component
//! problems the bracket is exactly zero and the trajectory is bit-identical
//! to full-batch gradient descent.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Optimizer, StepOutcome};
use crate::error::CoreError;
use crate::numkit::SeededRng;
use crate::problems::Objective;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrgState {
    pub snapshot_point: Vec<f64>,
    pub snapshot_full_gradient: Vec<f64>,
    pub epoch_length: usize,
    pub inner_step: usize,
    pub alpha: f64,
}

impl SvrgState {
    pub fn new(dim: usize, alpha: f64, epoch_length: usize) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::InvalidDimension {
                context: "SvrgState::new",
                dim: 0,
            });
        }
        if epoch_length == 0 {
            return Err(CoreError::Parameter("epoch_length must be positive".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CoreError::Parameter(format!("alpha {alpha} must be > 0")));
        }
        Ok(SvrgState {
            snapshot_point: alloc::vec![0.0; dim],
            snapshot_full_gradient: alloc::vec![0.0; dim],
            epoch_length,
            inner_step: 0,
            alpha,
        })
    }

    /// Installs a new snapshot and restarts the inner counter.
    pub fn refresh(&mut self, point: &[f64], full_gradient: Vec<f64>) {
        self.snapshot_point = point.to_vec();
        self.snapshot_full_gradient = full_gradient;
        self.inner_step = 0;
    }
}

/// One inner SVRG update of `x`; returns the variance-reduced direction.
pub fn svrg_step(
    state: &mut SvrgState,
    x: &mut [f64],
    component_grad_at_x: &[f64],
    component_grad_at_snapshot: &[f64],
) -> Result<Vec<f64>, CoreError> {
    let dim = state.snapshot_full_gradient.len();
    if x.len() != dim || component_grad_at_x.len() != dim || component_grad_at_snapshot.len() != dim
    {
        return Err(CoreError::ShapeMismatch {
            context: "svrg_step",
            left: format!("state dim {dim}"),
            right: format!(
                "x {}, grad {}, snapshot grad {}",
                x.len(),
                component_grad_at_x.len(),
                component_grad_at_snapshot.len()
            ),
        });
    }
    let direction: Vec<f64> = (0..dim)
        .map(|i| {
            component_grad_at_x[i]
                + (state.snapshot_full_gradient[i] - component_grad_at_snapshot[i])
        })
        .collect();
    for (xi, d) in x.iter_mut().zip(&direction) {
        *xi -= state.alpha * d;
    }
    state.inner_step += 1;
    Ok(direction)
}

pub struct SvrgOptimizer {
    state: SvrgState,
    started: bool,
}

impl SvrgOptimizer {
    pub fn new(dim: usize, alpha: f64, epoch_length: usize) -> Result<Self, CoreError> {
        Ok(SvrgOptimizer {
            state: SvrgState::new(dim, alpha, epoch_length)?,
            started: false,
        })
    }

    pub fn state(&self) -> &SvrgState {
        &self.state
    }
}

impl Optimizer for SvrgOptimizer {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError> {
        if !self.started || self.state.inner_step >= self.state.epoch_length {
            self.state.refresh(x, problem.gradient(x, iteration));
            self.started = true;
        }
        let n = problem.component_count().max(1);
        let component = rng.below(n as u64) as usize;
        let g_x = problem.component_gradient(x, component, iteration);
        let g_snap = problem.component_gradient(&self.state.snapshot_point, component, iteration);
        let direction = svrg_step(&mut self.state, x, &g_x, &g_snap)?;
        Ok(StepOutcome::plain(direction))
    }
}
