//! ADAM with bias correction.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Optimizer, StepOutcome};
use crate::error::CoreError;
use crate::numkit::SeededRng;
use crate::problems::Objective;

/// Second-moment update rule.
///
/// `Standard` is the usual `v <- beta2 * v + (1 - beta2) * g^2`.
/// `PaperLiteral` reproduces an unsquared variant sometimes written as
/// `v <- beta2 * v + (1 - beta1) * g`; it can drive `v` negative, so the
/// denominator clamps at zero before the square root to stay finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdamVariant {
    #[default]
    Standard,
    PaperLiteral,
}

/// Per-run ADAM state: moment vectors plus hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: usize,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_num: f64,
    pub variant: AdamVariant,
}

impl AdamState {
    pub fn new(
        dim: usize,
        alpha: f64,
        beta1: f64,
        beta2: f64,
        eps_num: f64,
        variant: AdamVariant,
    ) -> Result<Self, CoreError> {
        if dim == 0 {
            return Err(CoreError::InvalidDimension {
                context: "AdamState::new",
                dim: 0,
            });
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(CoreError::Parameter(format!("alpha {alpha} must be > 0")));
        }
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(b.is_finite() && (0.0..1.0).contains(&b)) {
                return Err(CoreError::Parameter(format!("{name} {b} must be in [0, 1)")));
            }
        }
        if !(eps_num.is_finite() && eps_num > 0.0) {
            return Err(CoreError::Parameter(format!(
                "eps_num {eps_num} must be > 0"
            )));
        }
        Ok(AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            t: 0,
            alpha,
            beta1,
            beta2,
            eps_num,
            variant,
        })
    }
}

/// One bias-corrected ADAM update of `x` in place.
pub fn adam_step(state: &mut AdamState, x: &mut [f64], grad: &[f64]) -> Result<(), CoreError> {
    if x.len() != state.m.len() || grad.len() != state.m.len() {
        return Err(CoreError::ShapeMismatch {
            context: "adam_step",
            left: format!("state dim {}", state.m.len()),
            right: format!("x len {}, grad len {}", x.len(), grad.len()),
        });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(CoreError::NonFinite {
            context: "adam_step: gradient",
            iteration: state.t + 1,
        });
    }
    state.t += 1;
    let bc1 = 1.0 - libm::pow(state.beta1, state.t as f64);
    let bc2 = 1.0 - libm::pow(state.beta2, state.t as f64);
    for i in 0..x.len() {
        let g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = match state.variant {
            AdamVariant::Standard => state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g,
            AdamVariant::PaperLiteral => state.beta2 * state.v[i] + (1.0 - state.beta1) * g,
        };
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        let denom = libm::sqrt(if v_hat > 0.0 { v_hat } else { 0.0 }) + state.eps_num;
        x[i] -= state.alpha * m_hat / denom;
    }
    Ok(())
}

pub struct AdamOptimizer {
    state: AdamState,
}

impl AdamOptimizer {
    pub fn new(state: AdamState) -> Self {
        AdamOptimizer { state }
    }

    pub fn state(&self) -> &AdamState {
        &self.state
    }
}

impl Optimizer for AdamOptimizer {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        _rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError> {
        let grad = problem.gradient(x, iteration);
        adam_step(&mut self.state, x, &grad)?;
        Ok(StepOutcome::plain(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh(dim: usize) -> AdamState {
        AdamState::new(dim, 0.1, 0.9, 0.999, 1e-8, AdamVariant::Standard).unwrap()
    }

    #[test]
    fn first_step_magnitude_is_alpha() {
        // Hand evaluation of the four update lines at t = 1:
        // m = 0.2, v = 0.004, m_hat = 2, v_hat = 4,
        // x = 1 - 0.1 * 2 / (2 + 1e-8) ~= 0.9
        let mut state = fresh(1);
        let mut x = [1.0];
        adam_step(&mut state, &mut x, &[2.0]).unwrap();
        let expected = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        assert_eq!(x[0], expected);
        assert!((x[0] - 0.9).abs() < 1e-7);
    }

    #[test]
    fn zero_gradient_with_zero_moments_is_stationary() {
        let mut state = fresh(2);
        let mut x = [3.0, -1.0];
        adam_step(&mut state, &mut x, &[0.0, 0.0]).unwrap();
        assert_eq!(x, [3.0, -1.0]);
    }

    #[test]
    fn identical_states_step_identically() {
        let mut a = fresh(3);
        let mut b = fresh(3);
        let mut xa = [0.5, -0.5, 2.0];
        let mut xb = xa;
        for _ in 0..5 {
            adam_step(&mut a, &mut xa, &[1.0, -2.0, 0.25]).unwrap();
            adam_step(&mut b, &mut xb, &[1.0, -2.0, 0.25]).unwrap();
        }
        assert_eq!(xa, xb);
        assert_eq!(a, b);
    }

    #[test]
    fn second_moment_stays_nonnegative() {
        let mut state = fresh(1);
        let mut x = [0.0];
        for g in [-3.0, 2.0, -1.0, 0.5, -4.0] {
            adam_step(&mut state, &mut x, &[g]).unwrap();
            assert!(state.v[0] >= 0.0);
        }
        assert_eq!(state.t, 5);
    }

    #[test]
    fn nonfinite_gradient_names_iteration() {
        let mut state = fresh(1);
        let mut x = [0.0];
        adam_step(&mut state, &mut x, &[1.0]).unwrap();
        let err = adam_step(&mut state, &mut x, &[f64::NAN]).unwrap_err();
        assert_eq!(
            err,
            CoreError::NonFinite {
                context: "adam_step: gradient",
                iteration: 2
            }
        );
    }

    #[test]
    fn literal_variant_differs_but_stays_finite() {
        let mut std_state = fresh(1);
        let mut lit_state =
            AdamState::new(1, 0.1, 0.9, 0.999, 1e-8, AdamVariant::PaperLiteral).unwrap();
        let mut xs = [1.0];
        let mut xl = [1.0];
        for g in [2.0, -2.0, 2.0] {
            adam_step(&mut std_state, &mut xs, &[g]).unwrap();
            adam_step(&mut lit_state, &mut xl, &[g]).unwrap();
        }
        assert!(xl[0].is_finite());
        assert_ne!(xs, xl);
    }
}
