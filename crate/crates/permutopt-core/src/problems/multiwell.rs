//! Separable piecewise-linear multi-well landscape.
//!
//! Per coordinate `i` the term is `min(|u - a_i|, |u - b_i| + c_i)`: a
//! primary well of depth 0 at `a_i` and a secondary well with floor `c_i`
//! at `b_i`. With `0 <= c_i < |a_i - b_i|` the term is Lipschitz (constant 1
//! per coordinate), nonsmooth at the well centers and branch ties, and
//! nonconvex. The global optimum is the vector of primary centers with
//! value 0.

use alloc::format;
use alloc::vec::Vec;

use super::{DomainBox, Objective};
use crate::error::CoreError;
use crate::numkit::SeededRng;

pub struct MultiWellProblem {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    domain: DomainBox,
    init_box: Option<DomainBox>,
}

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl MultiWellProblem {
    pub fn new(
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        domain: DomainBox,
        init_box: Option<DomainBox>,
    ) -> Result<Self, CoreError> {
        let dim = domain.dim();
        if a.len() != dim || b.len() != dim || c.len() != dim {
            return Err(CoreError::ShapeMismatch {
                context: "MultiWellProblem::new",
                left: format!("domain dim {dim}"),
                right: format!("wells {}x{}x{}", a.len(), b.len(), c.len()),
            });
        }
        for i in 0..dim {
            if c[i] < 0.0 {
                return Err(CoreError::Parameter(format!(
                    "secondary well floor c[{i}] = {} must be nonnegative",
                    c[i]
                )));
            }
            if !domain.contains_coord(i, a[i]) || !domain.contains_coord(i, b[i]) {
                return Err(CoreError::Parameter(format!(
                    "well centers for coordinate {i} lie outside the domain box"
                )));
            }
        }
        if let Some(init) = &init_box {
            if init.dim() != dim {
                return Err(CoreError::ShapeMismatch {
                    context: "MultiWellProblem::new",
                    left: format!("domain dim {dim}"),
                    right: format!("init box dim {}", init.dim()),
                });
            }
        }
        Ok(MultiWellProblem {
            a,
            b,
            c,
            domain,
            init_box,
        })
    }

    /// The global optimum: the vector of primary well centers.
    pub fn global_optimum(&self) -> &[f64] {
        &self.a
    }

    /// Objective value at the global optimum (0 by construction).
    pub fn global_value(&self) -> f64 {
        0.0
    }

    /// Value and selected subgradient at `x`. Points outside the domain box
    /// are clamped onto it first; the flag reports whether clamping moved
    /// the point. The subgradient is `±1` per coordinate and exactly 0 at
    /// kinks (well centers and branch ties).
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>, bool) {
        assert_eq!(x.len(), self.dim());
        let (x, clamped) = self.domain.clamp(x);
        let mut f = 0.0;
        let mut g = Vec::with_capacity(x.len());
        for (i, &u) in x.iter().enumerate() {
            let da = libm::fabs(u - self.a[i]);
            let db = libm::fabs(u - self.b[i]) + self.c[i];
            if da < db {
                f += da;
                g.push(sign(u - self.a[i]));
            } else if db < da {
                f += db;
                g.push(sign(u - self.b[i]));
            } else {
                f += da;
                g.push(0.0);
            }
        }
        (f, g, clamped)
    }
}

impl Objective for MultiWellProblem {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn loss(&self, x: &[f64]) -> f64 {
        self.eval_grad(x).0
    }

    fn gradient(&self, x: &[f64], _iteration: usize) -> Vec<f64> {
        self.eval_grad(x).1
    }

    fn domain(&self) -> DomainBox {
        self.domain.clone()
    }

    fn initial_point(&self, rng: &mut SeededRng) -> Vec<f64> {
        match &self.init_box {
            Some(init) => init.sample(rng),
            None => self.domain.sample(rng),
        }
    }

    fn global_optimum(&self) -> Option<Vec<f64>> {
        Some(self.a.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one_dim() -> MultiWellProblem {
        MultiWellProblem::new(
            vec![0.0],
            vec![4.0],
            vec![1.0],
            DomainBox::cube(1, -1.0, 5.0).unwrap(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn piecewise_arithmetic() {
        // At x = 3: min(3, |3-4| + 1) = 2, descending toward the secondary well.
        let p = one_dim();
        let (f, g, clamped) = p.eval_grad(&[3.0]);
        assert_eq!(f, 2.0);
        assert_eq!(g, vec![-1.0]);
        assert!(!clamped);
    }

    #[test]
    fn optimum_has_zero_subgradient() {
        let p = one_dim();
        let (f, g, _) = p.eval_grad(&[0.0]);
        assert_eq!(f, p.global_value());
        assert!(g.contains(&0.0));
    }

    #[test]
    fn out_of_box_points_are_clamped() {
        let p = one_dim();
        let (f, _, clamped) = p.eval_grad(&[9.0]);
        assert!(clamped);
        assert_eq!(f, p.eval_grad(&[5.0]).0);
    }
}
