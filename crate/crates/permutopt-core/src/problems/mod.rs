//! Objective oracles: loss value plus (sub)gradient at a parameter point,
//! with a domain box for initialization and coverage analysis.

mod dnmf;
mod logistic;
mod multiwell;
mod noisy;
mod quadratic;

pub use dnmf::{gen_synthetic_matrix, DnmfProblem};
pub(crate) use dnmf::{prefix_products, suffix_products};
pub use logistic::LogisticProblem;
pub use multiwell::MultiWellProblem;
pub use noisy::NoisyGradientWrapper;
pub use quadratic::QuadraticProblem;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::numkit::{mix_seed, SeededRng};

/// Axis-aligned box, one `[lo, hi]` interval per dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, CoreError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(CoreError::ShapeMismatch {
                context: "DomainBox::new",
                left: format!("lo len {}", lo.len()),
                right: format!("hi len {}", hi.len()),
            });
        }
        for (l, h) in lo.iter().zip(&hi) {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(CoreError::Parameter(format!(
                    "domain interval [{l}, {h}] is empty or non-finite"
                )));
            }
        }
        Ok(DomainBox { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, CoreError> {
        DomainBox::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Uniform draw inside the box, one coordinate at a time.
    pub fn sample(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| rng.range_f64(l, h))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&l, &h))| v >= l && v <= h)
    }

    pub fn contains_coord(&self, i: usize, v: f64) -> bool {
        v >= self.lo[i] && v <= self.hi[i]
    }

    /// Clamps `x` into the box; the flag reports whether anything moved.
    pub fn clamp(&self, x: &[f64]) -> (Vec<f64>, bool) {
        let mut clamped = false;
        let out = x
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(&v, (&l, &h))| {
                let c = if v < l {
                    l
                } else if v > h {
                    h
                } else {
                    v
                };
                if c != v {
                    clamped = true;
                }
                c
            })
            .collect();
        (out, clamped)
    }
}

/// An optimization problem: objective value and (sub)gradient over a flat
/// row-major parameter vector.
///
/// Problems are immutable after construction and can be shared across
/// concurrent runs. `iteration` is threaded through the gradient calls so
/// wrappers with iteration-dependent behavior (gradient noise) stay pure.
pub trait Objective: Send + Sync {
    /// Number of parameters in the flattened vector.
    fn dim(&self) -> usize;

    /// Full objective value, including any penalty terms.
    fn loss(&self, x: &[f64]) -> f64;

    /// (Sub)gradient of [`Objective::loss`] at `x`.
    fn gradient(&self, x: &[f64], iteration: usize) -> Vec<f64>;

    /// The quantity reported in run records. Defaults to the full loss;
    /// problems with penalty terms report the penalty-free metric here.
    fn metric(&self, x: &[f64]) -> f64 {
        self.loss(x)
    }

    fn domain(&self) -> DomainBox;

    /// Starting point for a run; seeded uniform inside the domain box
    /// unless the problem supplies something more specific.
    fn initial_point(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.domain().sample(rng)
    }

    /// Number of stochastic components; 1 means full-batch only.
    fn component_count(&self) -> usize {
        1
    }

    /// Gradient of component `component`; the mean over all components
    /// equals [`Objective::gradient`].
    fn component_gradient(&self, x: &[f64], component: usize, iteration: usize) -> Vec<f64> {
        let _ = component;
        self.gradient(x, iteration)
    }

    /// Row-major ranges of the trainable blocks inside the flat vector.
    fn param_blocks(&self) -> Vec<Range<usize>> {
        vec![0..self.dim()]
    }

    /// Structural access for optimizers that need the factorization layout.
    fn as_dnmf(&self) -> Option<&DnmfProblem> {
        None
    }

    /// Known global optimum, for problems constructed with one.
    fn global_optimum(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Restricts any objective to a single stochastic component, making
/// variance-reduced methods collapse onto their full-batch counterpart.
pub struct SingleComponent<P>(pub P);

impl<P: Objective> Objective for SingleComponent<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn loss(&self, x: &[f64]) -> f64 {
        self.0.loss(x)
    }
    fn gradient(&self, x: &[f64], iteration: usize) -> Vec<f64> {
        self.0.gradient(x, iteration)
    }
    fn metric(&self, x: &[f64]) -> f64 {
        self.0.metric(x)
    }
    fn domain(&self) -> DomainBox {
        self.0.domain()
    }
    fn initial_point(&self, rng: &mut SeededRng) -> Vec<f64> {
        self.0.initial_point(rng)
    }
    fn param_blocks(&self) -> Vec<Range<usize>> {
        self.0.param_blocks()
    }
}

/// Scalar applied to every coordinate, or one value per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerDim {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl PerDim {
    pub fn resolve(&self, dim: usize, what: &str) -> Result<Vec<f64>, CoreError> {
        match self {
            PerDim::Scalar(v) => Ok(vec![*v; dim]),
            PerDim::Vector(vs) => {
                if vs.len() != dim {
                    return Err(CoreError::Parameter(format!(
                        "{what}: expected {dim} per-dimension values, got {}",
                        vs.len()
                    )));
                }
                Ok(vs.clone())
            }
        }
    }
}

fn default_layers() -> usize {
    2
}

fn default_l1_weight() -> f64 {
    0.01
}

/// Declarative problem description; the JSON form of this enum is the
/// problem-config schema used in experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Smooth convex `0.5 * ||x - c||^2` with a seeded center.
    Quadratic { dim: usize, seed: u64 },
    /// Deep nonlinear factorization of a seeded synthetic low-rank matrix.
    /// `period`/`noise_scale` switch on periodic gradient noise.
    Dnmf {
        rows: usize,
        cols: usize,
        rank: usize,
        #[serde(default = "default_layers")]
        layers: usize,
        seed: u64,
        #[serde(default)]
        noise: f64,
        #[serde(default = "default_l1_weight")]
        l1_weight: f64,
        #[serde(default)]
        period: Option<usize>,
        #[serde(default)]
        noise_scale: f64,
    },
    /// Synthetic logistic regression with a seeded planted weight vector.
    Logistic {
        samples: usize,
        features: usize,
        seed: u64,
        #[serde(default)]
        l2_weight: f64,
    },
    /// Logistic regression over an on-disk CSV dataset; resolved by the
    /// harness, which owns file IO.
    LogisticCsv {
        path: String,
        #[serde(default)]
        l2_weight: f64,
        #[serde(default)]
        has_header: bool,
    },
    /// Separable piecewise-linear multi-well landscape.
    MultiWell {
        dim: usize,
        a: PerDim,
        b: PerDim,
        c: PerDim,
        lo: f64,
        hi: f64,
        #[serde(default)]
        init_lo: Option<PerDim>,
        #[serde(default)]
        init_hi: Option<PerDim>,
    },
}

impl ProblemConfig {
    /// Instantiates the problem. `run_seed` only feeds derived noise
    /// streams; the problem data itself depends solely on the config seed,
    /// so all runs of an experiment see identical data.
    pub fn build(&self, run_seed: u64) -> Result<Box<dyn Objective>, CoreError> {
        match self {
            ProblemConfig::Quadratic { dim, seed } => {
                Ok(Box::new(QuadraticProblem::seeded(*dim, *seed)?))
            }
            ProblemConfig::Dnmf {
                rows,
                cols,
                rank,
                layers,
                seed,
                noise,
                l1_weight,
                period,
                noise_scale,
            } => {
                let s = gen_synthetic_matrix(*rows, *cols, *rank, *seed, *noise)?;
                let problem = DnmfProblem::new(s, *layers, *rank, *l1_weight)?;
                match period {
                    Some(p) => {
                        let noise_seed = mix_seed(&[*seed, run_seed, 0x6e6f6973]);
                        Ok(Box::new(NoisyGradientWrapper::new(
                            Box::new(problem),
                            *p,
                            *noise_scale,
                            noise_seed,
                        )?))
                    }
                    None => Ok(Box::new(problem)),
                }
            }
            ProblemConfig::Logistic {
                samples,
                features,
                seed,
                l2_weight,
            } => Ok(Box::new(LogisticProblem::synthetic(
                *samples, *features, *seed, *l2_weight,
            )?)),
            ProblemConfig::LogisticCsv { path, .. } => Err(CoreError::Parameter(format!(
                "csv-backed problem '{path}' must be resolved by the harness"
            ))),
            ProblemConfig::MultiWell {
                dim,
                a,
                b,
                c,
                lo,
                hi,
                init_lo,
                init_hi,
            } => {
                let domain = DomainBox::cube(*dim, *lo, *hi)?;
                let init = match (init_lo, init_hi) {
                    (Some(il), Some(ih)) => Some(DomainBox::new(
                        il.resolve(*dim, "init_lo")?,
                        ih.resolve(*dim, "init_hi")?,
                    )?),
                    (None, None) => None,
                    _ => {
                        return Err(CoreError::Parameter(
                            "init_lo and init_hi must be given together".into(),
                        ))
                    }
                };
                Ok(Box::new(MultiWellProblem::new(
                    a.resolve(*dim, "a")?,
                    b.resolve(*dim, "b")?,
                    c.resolve(*dim, "c")?,
                    domain,
                    init,
                )?))
            }
        }
    }

    /// Short name used in artifact paths when the config entry is unnamed.
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemConfig::Quadratic { .. } => "quadratic",
            ProblemConfig::Dnmf { period: None, .. } => "dnmf",
            ProblemConfig::Dnmf { .. } => "noisy-dnmf",
            ProblemConfig::Logistic { .. } => "logistic",
            ProblemConfig::LogisticCsv { .. } => "logistic-csv",
            ProblemConfig::MultiWell { .. } => "multiwell",
        }
    }
}
