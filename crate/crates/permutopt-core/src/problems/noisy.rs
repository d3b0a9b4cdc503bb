//! Periodic gradient-noise wrapper.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use super::{DomainBox, Objective};
use crate::error::CoreError;
use crate::numkit::{mix_seed, SeededRng};

/// Injects seeded Gaussian noise into the inner gradient at iterations that
/// are multiples of `period`; all other calls pass through untouched.
///
/// The noise for iteration `t` is a pure function of `(noise_seed, t)`, so
/// concurrent or out-of-order evaluation cannot reorder the stream.
pub struct NoisyGradientWrapper {
    inner: Box<dyn Objective>,
    period: usize,
    scale: f64,
    noise_seed: u64,
}

impl NoisyGradientWrapper {
    /// Default injection period when a config enables noise without one.
    pub const DEFAULT_PERIOD: usize = 10;

    pub fn new(
        inner: Box<dyn Objective>,
        period: usize,
        scale: f64,
        noise_seed: u64,
    ) -> Result<Self, CoreError> {
        if period == 0 {
            return Err(CoreError::Parameter("noise period must be positive".into()));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(CoreError::Parameter(format!(
                "noise scale must be finite and nonnegative, got {scale}"
            )));
        }
        Ok(NoisyGradientWrapper {
            inner,
            period,
            scale,
            noise_seed,
        })
    }

    pub fn period(&self) -> usize {
        self.period
    }

    fn noise_active(&self, iteration: usize) -> bool {
        self.scale > 0.0 && iteration >= 1 && iteration % self.period == 0
    }

    fn add_noise(&self, grad: &mut [f64], iteration: usize) {
        let mut rng = SeededRng::new(mix_seed(&[self.noise_seed, iteration as u64]));
        for g in grad.iter_mut() {
            *g += self.scale * rng.normal();
        }
    }

    /// Inner gradient, perturbed only when `iteration % period == 0`.
    pub fn noisy_grad(&self, iteration: usize, x: &[f64]) -> Vec<f64> {
        let mut grad = self.inner.gradient(x, iteration);
        if self.noise_active(iteration) {
            self.add_noise(&mut grad, iteration);
        }
        grad
    }
}

impl Objective for NoisyGradientWrapper {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn loss(&self, x: &[f64]) -> f64 {
        self.inner.loss(x)
    }

    fn gradient(&self, x: &[f64], iteration: usize) -> Vec<f64> {
        self.noisy_grad(iteration, x)
    }

    fn metric(&self, x: &[f64]) -> f64 {
        self.inner.metric(x)
    }

    fn domain(&self) -> DomainBox {
        self.inner.domain()
    }

    fn initial_point(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.inner.initial_point(rng)
    }

    fn component_count(&self) -> usize {
        self.inner.component_count()
    }

    fn component_gradient(&self, x: &[f64], component: usize, iteration: usize) -> Vec<f64> {
        let mut grad = self.inner.component_gradient(x, component, iteration);
        if self.noise_active(iteration) {
            self.add_noise(&mut grad, iteration);
        }
        grad
    }

    fn param_blocks(&self) -> Vec<Range<usize>> {
        self.inner.param_blocks()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::QuadraticProblem;
    use alloc::vec;

    fn wrapped(scale: f64) -> NoisyGradientWrapper {
        let inner = Box::new(QuadraticProblem::seeded(4, 1).unwrap());
        NoisyGradientWrapper::new(inner, 10, scale, 99).unwrap()
    }

    #[test]
    fn off_cycle_iterations_pass_through() {
        let w = wrapped(0.1);
        let x = vec![0.3; 4];
        let clean = w.inner.gradient(&x, 7);
        assert_eq!(w.noisy_grad(7, &x), clean);
    }

    #[test]
    fn zero_scale_is_exact_passthrough() {
        let w = wrapped(0.0);
        let x = vec![0.3; 4];
        assert_eq!(w.noisy_grad(10, &x), w.inner.gradient(&x, 10));
    }

    #[test]
    fn injection_is_reproducible() {
        let a = wrapped(0.1);
        let b = wrapped(0.1);
        let x = vec![0.3; 4];
        let ga = a.noisy_grad(10, &x);
        assert_eq!(ga, b.noisy_grad(10, &x));
        assert_ne!(ga, a.inner.gradient(&x, 10));
    }

    #[test]
    fn at_most_every_period_th_call_differs() {
        let w = wrapped(0.1);
        let x = vec![0.3; 4];
        let t_max = 97;
        let clean = w.inner.gradient(&x, 1);
        let perturbed = (1..=t_max)
            .filter(|&t| w.noisy_grad(t, &x) != clean)
            .count();
        assert_eq!(perturbed, t_max / w.period());
    }
}
