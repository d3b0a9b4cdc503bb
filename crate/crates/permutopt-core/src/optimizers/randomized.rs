//! Permutation-randomization wrapper around any base optimizer.
//!
//! After each base step the wrapper compares the current and previous
//! gradients; while they stagnate (difference norm strictly below the
//! trigger threshold) it samples a fresh uniform permutation and reorders
//! the flattened parameter vector, recording the event. Reordering does no
//! arithmetic, so each event preserves the parameter norm exactly. The
//! wrapper touches the rng only when the trigger fires, which keeps a
//! zero-threshold wrapper bit-identical to the bare base optimizer.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{Optimizer, PermutationScope, StepOutcome};
use crate::error::CoreError;
use crate::numkit::{l2_norm, SeededRng};
use crate::operators::{sample_permutation, should_trigger, PermutationEvent, PermutationMap, TriggerPolicy};
use crate::problems::Objective;

pub struct RandomizedOptimizer {
    base: Box<dyn Optimizer>,
    trigger: TriggerPolicy,
    scope: PermutationScope,
    prev_gradient: Option<Vec<f64>>,
}

impl RandomizedOptimizer {
    pub fn new(base: Box<dyn Optimizer>, trigger: TriggerPolicy, scope: PermutationScope) -> Self {
        RandomizedOptimizer {
            base,
            trigger,
            scope,
            prev_gradient: None,
        }
    }

    /// Fresh permutation for the whole vector, or one per trainable block
    /// composed into a single block-diagonal map.
    fn sample_map(
        &self,
        problem: &dyn Objective,
        dim: usize,
        rng: &mut SeededRng,
    ) -> Result<PermutationMap, CoreError> {
        match self.scope {
            PermutationScope::Joint => sample_permutation(rng, dim),
            PermutationScope::PerBlock => {
                let mut indices: Vec<usize> = (0..dim).collect();
                for block in problem.param_blocks() {
                    let local = sample_permutation(rng, block.len())?;
                    for (offset, &src) in local.indices().iter().enumerate() {
                        indices[block.start + offset] = block.start + src;
                    }
                }
                PermutationMap::new(indices)
            }
        }
    }
}

impl Optimizer for RandomizedOptimizer {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError> {
        let outcome = self.base.step(problem, x, iteration, rng)?;
        // Before any gradient exists the comparison point is the zero
        // vector, so the trigger cannot fire at t = 1 unless the first
        // gradient is already below the threshold.
        let prev = self
            .prev_gradient
            .take()
            .unwrap_or_else(|| alloc::vec![0.0; outcome.gradient.len()]);
        let mut event = None;
        if should_trigger(&outcome.gradient, &prev, &self.trigger)? {
            let pre_norm = l2_norm(x);
            let map = self.sample_map(problem, x.len(), rng)?;
            let permuted = map.apply(x)?;
            *x = permuted;
            let post_norm = l2_norm(x);
            event = Some(PermutationEvent {
                iteration,
                map,
                pre_norm,
                post_norm,
            });
        }
        self.prev_gradient = Some(outcome.gradient.clone());
        Ok(StepOutcome {
            gradient: outcome.gradient,
            event,
        })
    }
}
