//! Binary logistic regression with optional L2 regularization.

use alloc::format;
use alloc::vec::Vec;

use super::{DomainBox, Objective};
use crate::error::CoreError;
use crate::numkit::{DenseMatrix, SeededRng};

/// Mean cross-entropy plus `(l2_weight / 2) * ||w||^2` over an `n x d`
/// feature matrix with 0/1 labels. Each sample is one stochastic component.
pub struct LogisticProblem {
    features: DenseMatrix,
    labels: Vec<f64>,
    l2_weight: f64,
}

#[inline]
fn sigmoid(m: f64) -> f64 {
    if m >= 0.0 {
        1.0 / (1.0 + libm::exp(-m))
    } else {
        let e = libm::exp(m);
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(m))` without overflow for large `|m|`.
#[inline]
fn softplus(m: f64) -> f64 {
    if m > 0.0 {
        m + libm::log1p(libm::exp(-m))
    } else {
        libm::log1p(libm::exp(m))
    }
}

impl LogisticProblem {
    pub fn new(features: DenseMatrix, labels: Vec<f64>, l2_weight: f64) -> Result<Self, CoreError> {
        if labels.len() != features.rows() {
            return Err(CoreError::ShapeMismatch {
                context: "LogisticProblem::new",
                left: features.shape_string(),
                right: format!("{} labels", labels.len()),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 0.0 && y != 1.0) {
            return Err(CoreError::Parameter(format!(
                "labels must be 0 or 1, got {bad}"
            )));
        }
        if !(l2_weight.is_finite() && l2_weight >= 0.0) {
            return Err(CoreError::Parameter(format!(
                "l2_weight must be finite and nonnegative, got {l2_weight}"
            )));
        }
        Ok(LogisticProblem {
            features,
            labels,
            l2_weight,
        })
    }

    /// Separable synthetic instance: standard normal features, labels drawn
    /// from the logistic model of a seeded planted weight vector.
    pub fn synthetic(
        samples: usize,
        features: usize,
        seed: u64,
        l2_weight: f64,
    ) -> Result<Self, CoreError> {
        if samples == 0 || features == 0 {
            return Err(CoreError::InvalidDimension {
                context: "LogisticProblem::synthetic",
                dim: samples.min(features),
            });
        }
        let mut rng = SeededRng::new(seed);
        let planted: Vec<f64> = (0..features).map(|_| rng.normal()).collect();
        let mat = DenseMatrix::from_fn(samples, features, |_, _| rng.normal());
        let labels = (0..samples)
            .map(|i| {
                let margin: f64 = mat.row(i).iter().zip(&planted).map(|(&x, &w)| x * w).sum();
                if rng.next_f64() < sigmoid(margin) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        LogisticProblem::new(mat, labels, l2_weight)
    }

    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    fn margin(&self, w: &[f64], i: usize) -> f64 {
        self.features
            .row(i)
            .iter()
            .zip(w)
            .map(|(&x, &wj)| x * wj)
            .sum()
    }

    /// Loss and exact gradient at `w` in one pass.
    pub fn loss_grad(&self, w: &[f64]) -> (f64, Vec<f64>) {
        assert_eq!(w.len(), self.features.cols());
        let n = self.samples() as f64;
        let mut loss = 0.0;
        let mut grad = alloc::vec![0.0; w.len()];
        for i in 0..self.samples() {
            let m = self.margin(w, i);
            let y = self.labels[i];
            loss += softplus(m) - y * m;
            let coeff = (sigmoid(m) - y) / n;
            for (g, &x) in grad.iter_mut().zip(self.features.row(i)) {
                *g += coeff * x;
            }
        }
        loss /= n;
        for (g, &wj) in grad.iter_mut().zip(w) {
            *g += self.l2_weight * wj;
        }
        loss += 0.5 * self.l2_weight * w.iter().map(|&v| v * v).sum::<f64>();
        (loss, grad)
    }
}

impl Objective for LogisticProblem {
    fn dim(&self) -> usize {
        self.features.cols()
    }

    fn loss(&self, x: &[f64]) -> f64 {
        self.loss_grad(x).0
    }

    fn gradient(&self, x: &[f64], _iteration: usize) -> Vec<f64> {
        self.loss_grad(x).1
    }

    fn domain(&self) -> DomainBox {
        DomainBox::cube(self.dim(), -1.0, 1.0).expect("nonzero dim")
    }

    fn component_count(&self) -> usize {
        self.samples()
    }

    fn component_gradient(&self, x: &[f64], component: usize, _iteration: usize) -> Vec<f64> {
        assert!(component < self.samples());
        let coeff = sigmoid(self.margin(x, component)) - self.labels[component];
        self.features
            .row(component)
            .iter()
            .zip(x)
            .map(|(&f, &wj)| coeff * f + self.l2_weight * wj)
            .collect()
    }
}
