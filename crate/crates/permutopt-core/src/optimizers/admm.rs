//! ADMM for the deep factorization problem.
//!
//! Treats `(prod X_i) * relu(Y) + Z = S` as an explicit constraint with a
//! scaled dual: one round performs gradient steps on the augmented
//! Lagrangian in the X blocks and Y (the ReLU enters through its
//! subgradient, 0 at the kink), a closed-form soft-threshold update of Z
//! with parameter `1/rho`, and dual ascent on the constraint residual.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::{Optimizer, StepOutcome};
use crate::error::CoreError;
use crate::numkit::{DenseMatrix, SeededRng};
use crate::problems::{prefix_products, suffix_products, DnmfProblem, Objective};

/// `sign(v) * max(|v| - threshold, 0)`.
pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmmDnmfState {
    pub rho: f64,
    /// Scaled dual for the equality constraint; same shape as the data.
    pub dual: DenseMatrix,
    /// Step size for the gradient updates of the X blocks and Y.
    pub inner_alpha: f64,
    /// Gradient steps on the X/Y blocks per round.
    pub inner_iters: usize,
}

impl AdmmDnmfState {
    pub fn new(
        data_shape: (usize, usize),
        rho: f64,
        inner_alpha: f64,
        inner_iters: usize,
    ) -> Result<Self, CoreError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(CoreError::Parameter(format!("rho {rho} must be > 0")));
        }
        if !(inner_alpha.is_finite() && inner_alpha > 0.0) {
            return Err(CoreError::Parameter(format!(
                "inner_alpha {inner_alpha} must be > 0"
            )));
        }
        if inner_iters == 0 {
            return Err(CoreError::Parameter("inner_iters must be positive".into()));
        }
        Ok(AdmmDnmfState {
            rho,
            dual: DenseMatrix::zeros(data_shape.0, data_shape.1),
            inner_alpha,
            inner_iters,
        })
    }
}

/// One ADMM round over the flat parameter vector `x`.
pub fn admm_dnmf_step(
    state: &mut AdmmDnmfState,
    problem: &DnmfProblem,
    x: &mut [f64],
) -> Result<(), CoreError> {
    if x.len() != problem.dim() {
        return Err(CoreError::ShapeMismatch {
            context: "admm_dnmf_step",
            left: format!("problem dim {}", problem.dim()),
            right: format!("x len {}", x.len()),
        });
    }
    let s = problem.data();
    if state.dual.shape() != s.shape() {
        return Err(CoreError::ShapeMismatch {
            context: "admm_dnmf_step",
            left: s.shape_string(),
            right: state.dual.shape_string(),
        });
    }
    let blocks = problem.param_blocks();
    let k = problem.layer_count();
    let mut xs: Vec<DenseMatrix> = (0..k)
        .map(|i| {
            let (r, c) = problem.x_shapes()[i];
            DenseMatrix::new(r, c, x[blocks[i].clone()].to_vec()).expect("block shape")
        })
        .collect();
    let (yr, yc) = problem.y_shape();
    let mut y = DenseMatrix::new(yr, yc, x[blocks[k].clone()].to_vec()).expect("block shape");
    let (m, n) = s.shape();
    let z = DenseMatrix::new(m, n, x[blocks[k + 1].clone()].to_vec()).expect("block shape");

    // X and Y blocks: gradient descent on
    // (rho/2) * ||A*relu(Y) + Z - S + U||_F^2 with Z fixed.
    for _ in 0..state.inner_iters {
        let prefixes = prefix_products(&xs);
        let h = y.relu();
        let suffix = suffix_products(&xs, &h);
        let shifted = suffix[0].add(&z)?.sub(s)?.add(&state.dual)?;
        let g = shifted.scale(state.rho);
        let grad_y = {
            let grad_h = prefixes[k - 1].transpose().mat_mul(&g)?;
            grad_h.hadamard(&y.map(|v| if v > 0.0 { 1.0 } else { 0.0 }))?
        };
        for i in 0..k {
            let right = g.mat_mul(&suffix[i + 1].transpose())?;
            let grad_x = if i == 0 {
                right
            } else {
                prefixes[i - 1].transpose().mat_mul(&right)?
            };
            xs[i] = xs[i].sub(&grad_x.scale(state.inner_alpha))?;
        }
        y = y.sub(&grad_y.scale(state.inner_alpha))?;
    }

    // Z block: closed-form shrinkage toward the constraint with
    // threshold 1/rho.
    let recon = prefix_products(&xs)
        .pop()
        .expect("at least one layer")
        .mat_mul(&y.relu())?;
    let target = s.sub(&recon)?.sub(&state.dual)?;
    let threshold = 1.0 / state.rho;
    let z = target.map(|v| soft_threshold(v, threshold));

    // Dual ascent on the residual of the equality constraint.
    let residual = recon.add(&z)?.sub(s)?;
    state.dual = state.dual.add(&residual)?;

    for i in 0..k {
        x[blocks[i].clone()].copy_from_slice(xs[i].as_slice());
    }
    x[blocks[k].clone()].copy_from_slice(y.as_slice());
    x[blocks[k + 1].clone()].copy_from_slice(z.as_slice());
    Ok(())
}

pub struct AdmmDnmfOptimizer {
    state: AdmmDnmfState,
}

impl AdmmDnmfOptimizer {
    pub fn new(
        problem: &DnmfProblem,
        rho: f64,
        inner_alpha: f64,
        inner_iters: usize,
    ) -> Result<Self, CoreError> {
        Ok(AdmmDnmfOptimizer {
            state: AdmmDnmfState::new(problem.data().shape(), rho, inner_alpha, inner_iters)?,
        })
    }

    pub fn state(&self) -> &AdmmDnmfState {
        &self.state
    }

    /// Frobenius norm of the current constraint residual.
    pub fn residual_norm(&self, problem: &DnmfProblem, x: &[f64]) -> Result<f64, CoreError> {
        let blocks = problem.param_blocks();
        let k = problem.layer_count();
        let xs: Vec<DenseMatrix> = (0..k)
            .map(|i| {
                let (r, c) = problem.x_shapes()[i];
                DenseMatrix::new(r, c, x[blocks[i].clone()].to_vec()).expect("block shape")
            })
            .collect();
        let (yr, yc) = problem.y_shape();
        let y = DenseMatrix::new(yr, yc, x[blocks[k].clone()].to_vec()).expect("block shape");
        let (m, n) = problem.data().shape();
        let z = DenseMatrix::new(m, n, x[blocks[k + 1].clone()].to_vec()).expect("block shape");
        let recon = prefix_products(&xs)
            .pop()
            .expect("at least one layer")
            .mat_mul(&y.relu())?;
        Ok(recon.add(&z)?.sub(problem.data())?.frobenius_norm())
    }
}

impl Optimizer for AdmmDnmfOptimizer {
    fn step(
        &mut self,
        problem: &dyn Objective,
        x: &mut Vec<f64>,
        iteration: usize,
        _rng: &mut SeededRng,
    ) -> Result<StepOutcome, CoreError> {
        let dnmf = problem.as_dnmf().ok_or_else(|| {
            CoreError::Parameter("admm requires a deep factorization problem".into())
        })?;
        admm_dnmf_step(&mut self.state, dnmf, x)?;
        let grad = problem.gradient(x, iteration);
        Ok(StepOutcome::plain(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::SeededRng;

    #[test]
    fn shrinkage_examples() {
        assert_eq!(soft_threshold(1.5, 1.0), 0.5);
        assert_eq!(soft_threshold(-1.5, 1.0), -0.5);
        assert_eq!(soft_threshold(0.3, 1.0), 0.0);
    }

    #[test]
    fn zero_residual_leaves_dual_unchanged() {
        // Exact factorization with Z = 0: every block update is a no-op and
        // the dual stays put.
        let mut rng = SeededRng::new(6);
        let a = DenseMatrix::random_uniform(4, 2, &mut rng, 0.1, 1.0);
        let b = DenseMatrix::random_uniform(2, 4, &mut rng, 0.1, 1.0);
        let s = a.mat_mul(&b).unwrap();
        let p = DnmfProblem::new(s, 2, 2, 0.0).unwrap();
        let mut x = p.pack(
            &[a, DenseMatrix::identity(2)],
            &b,
            &DenseMatrix::zeros(4, 4),
        );
        let before = x.clone();
        let mut state = AdmmDnmfState::new((4, 4), 1.0, 0.05, 1).unwrap();
        admm_dnmf_step(&mut state, &p, &mut x).unwrap();
        assert_eq!(state.dual, DenseMatrix::zeros(4, 4));
        assert_eq!(x, before);
    }
}
