//! Smooth convex reference problem `0.5 * ||x - c||^2`.

use alloc::vec::Vec;

use super::{DomainBox, Objective};
use crate::error::CoreError;
use crate::numkit::SeededRng;

/// Quadratic bowl with analytic minimum 0 at the stored center.
pub struct QuadraticProblem {
    center: Vec<f64>,
    domain: DomainBox,
}

impl QuadraticProblem {
    pub fn new(center: Vec<f64>) -> Result<Self, CoreError> {
        if center.is_empty() {
            return Err(CoreError::InvalidDimension {
                context: "QuadraticProblem::new",
                dim: 0,
            });
        }
        let domain = DomainBox::cube(center.len(), -1.0, 1.0)?;
        Ok(QuadraticProblem { center, domain })
    }

    /// Center drawn uniformly from `[-0.5, 0.5)^dim`.
    pub fn seeded(dim: usize, seed: u64) -> Result<Self, CoreError> {
        let mut rng = SeededRng::new(seed);
        let center = (0..dim).map(|_| rng.range_f64(-0.5, 0.5)).collect();
        QuadraticProblem::new(center)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn loss(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim());
        0.5 * x
            .iter()
            .zip(&self.center)
            .map(|(&v, &c)| (v - c) * (v - c))
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64], _iteration: usize) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        x.iter().zip(&self.center).map(|(&v, &c)| v - c).collect()
    }

    fn domain(&self) -> DomainBox {
        self.domain.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_is_zero_at_center() {
        let p = QuadraticProblem::seeded(4, 3).unwrap();
        let c = p.center().to_vec();
        assert_eq!(p.loss(&c), 0.0);
        assert!(p.gradient(&c, 1).iter().all(|&g| g == 0.0));
    }
}
