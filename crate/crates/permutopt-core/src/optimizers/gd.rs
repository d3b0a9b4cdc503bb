//! Plain (sub)gradient descent.

use alloc::format;
use alloc::vec::Vec;

use super::{Optimizer, StepOutcome};
use crate::error::CoreError;
use crate::numkit::SeededRng;
use crate::problems::Objective;

/// In-place update `x <- x - alpha * grad`.
pub fn gd_step(x: &mut [f64], grad: &[f64], alpha: f64) -> Result<(), CoreError> {
    if x.len() != grad.len() {
        return Err(CoreError::ShapeMismatch {
            context: "gd_step",
            left: format!("x len {}", x.len()),
            right: format!("grad len {}", grad.len()),
        });
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(CoreError::Parameter(format!(
            "step size must be finite and positive, got {alpha}"
        )));
    }
    for (xi, &gi) in x.iter_mut().zip(grad) {
        *xi -= alpha * gi;
    }
    Ok(())
}

pub struct GdOptimizer {
    alpha: f64,
}

impl GdOptimizer {
    pub fn new(alpha: f64) -> Result<Self, CoreError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CoreError::Parameter(format!(
                "step size must be finite and positive, got {alpha}"
            )));
        }
        Ok(GdOptimizer { alpha })
    }
}

impl Optimizer for GdOptimizer {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        _rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError> {
        let grad = problem.gradient(x, iteration);
        gd_step(x, &grad, self.alpha)?;
        Ok(StepOutcome::plain(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_kills_scalar_quadratic() {
        // f = x^2 at x = 4: grad 8, alpha 0.5 lands on the minimum.
        let mut x = [4.0];
        gd_step(&mut x, &[8.0], 0.5).unwrap();
        assert_eq!(x, [0.0]);
    }

    #[test]
    fn zero_gradient_is_stationary() {
        let mut x = [1.5, -2.0];
        gd_step(&mut x, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(x, [1.5, -2.0]);
    }

    #[test]
    fn hand_arithmetic() {
        let mut x = [1.0, 1.0];
        gd_step(&mut x, &[2.0, -2.0], 0.1).unwrap();
        assert_eq!(x, [0.8, 1.2]);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let mut x = [1.0];
        assert!(gd_step(&mut x, &[1.0, 2.0], 0.1).is_err());
    }
}
