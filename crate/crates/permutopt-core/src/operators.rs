//! Coordinate-permutation operator, its sampling distribution, and the
//! gradient-stagnation trigger that decides when to apply it.
//!
//! Applying a permutation only moves entries; it performs no arithmetic, so
//! it is an exact isometry in every p-norm. Combined with the order-invariant
//! norms in [`crate::numkit`], recorded pre/post norms agree bit for bit.

use alloc::format;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::numkit::{l2_distance, l2_norm, SeededRng};

/// A bijection on `{0..d-1}`: output component `i` takes input component
/// `indices[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PermutationMap {
    indices: Vec<usize>,
}

impl PermutationMap {
    /// Validates that `indices` contains each of `0..d-1` exactly once.
    pub fn new(indices: Vec<usize>) -> Result<Self, CoreError> {
        let d = indices.len();
        if d == 0 {
            return Err(CoreError::InvalidDimension {
                context: "PermutationMap::new",
                dim: 0,
            });
        }
        let mut seen = alloc::vec![false; d];
        for &ix in &indices {
            if ix >= d || seen[ix] {
                return Err(CoreError::Parameter(format!(
                    "indices of length {d} are not a bijection (offending value {ix})"
                )));
            }
            seen[ix] = true;
        }
        Ok(PermutationMap { indices })
    }

    pub fn identity(d: usize) -> Self {
        PermutationMap {
            indices: (0..d).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_identity(&self) -> bool {
        self.indices.iter().enumerate().all(|(i, &ix)| i == ix)
    }

    /// Reorders `v`: `out[i] = v[indices[i]]`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, CoreError> {
        if v.len() != self.indices.len() {
            return Err(CoreError::ShapeMismatch {
                context: "apply_permutation",
                left: format!("map len {}", self.indices.len()),
                right: format!("vector len {}", v.len()),
            });
        }
        Ok(self.indices.iter().map(|&ix| v[ix]).collect())
    }

    /// The inverse bijection: `inv.apply(map.apply(v)) == v`.
    pub fn inverse(&self) -> PermutationMap {
        let mut inv = alloc::vec![0usize; self.indices.len()];
        for (i, &ix) in self.indices.iter().enumerate() {
            inv[ix] = i;
        }
        PermutationMap { indices: inv }
    }
}

/// Uniformly distributed permutation of size `d` via a Fisher-Yates shuffle
/// driven by unbiased integer draws; deterministic given the rng state.
pub fn sample_permutation(rng: &mut SeededRng, d: usize) -> Result<PermutationMap, CoreError> {
    if d == 0 {
        return Err(CoreError::InvalidDimension {
            context: "sample_permutation",
            dim: 0,
        });
    }
    let mut indices: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.below((i + 1) as u64) as usize;
        indices.swap(i, j);
    }
    Ok(PermutationMap { indices })
}

/// When to permute: fire while the gradient stagnates, i.e. the Euclidean
/// norm of the difference between consecutive flattened gradients falls
/// strictly below `threshold`. A threshold of 0 therefore disables the
/// trigger entirely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerPolicy {
    pub threshold: f64,
}

impl TriggerPolicy {
    pub fn new(threshold: f64) -> Result<Self, CoreError> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(CoreError::Parameter(format!(
                "trigger threshold must be finite and nonnegative, got {threshold}"
            )));
        }
        Ok(TriggerPolicy { threshold })
    }

    pub fn disabled() -> Self {
        TriggerPolicy { threshold: 0.0 }
    }
}

impl Default for TriggerPolicy {
    fn default() -> Self {
        TriggerPolicy { threshold: 1.0e-2 }
    }
}

/// True iff `‖g_now - g_prev‖₂ < policy.threshold` (strict).
pub fn should_trigger(
    g_now: &[f64],
    g_prev: &[f64],
    policy: &TriggerPolicy,
) -> Result<bool, CoreError> {
    if g_now.len() != g_prev.len() {
        return Err(CoreError::ShapeMismatch {
            context: "should_trigger",
            left: format!("len {}", g_now.len()),
            right: format!("len {}", g_prev.len()),
        });
    }
    Ok(l2_distance(g_now, g_prev) < policy.threshold)
}

/// One recorded application of the permutation operator during a run.
///
/// `pre_norm` and `post_norm` are the parameter-vector norms immediately
/// before and after the reordering; they agree within 1e-12 on every event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationEvent {
    pub iteration: usize,
    #[serde(rename = "indices")]
    pub map: PermutationMap,
    pub pre_norm: f64,
    pub post_norm: f64,
}

/// Empirical operator norm: the maximum of `‖Rv‖/‖v‖` over `trials` random
/// nonzero vectors and independently sampled maps.
pub fn estimate_operator_norm(
    d: usize,
    trials: usize,
    rng: &mut SeededRng,
) -> Result<f64, CoreError> {
    if d == 0 {
        return Err(CoreError::InvalidDimension {
            context: "estimate_operator_norm",
            dim: 0,
        });
    }
    if trials == 0 {
        return Err(CoreError::Parameter("trials must be at least 1".into()));
    }
    let mut max_ratio = 0.0f64;
    for _ in 0..trials {
        let map = sample_permutation(rng, d)?;
        let mut v = rng.normal_vec(d);
        let mut norm = l2_norm(&v);
        while norm == 0.0 {
            v = rng.normal_vec(d);
            norm = l2_norm(&v);
        }
        let ratio = l2_norm(&map.apply(&v)?) / norm;
        if ratio > max_ratio {
            max_ratio = ratio;
        }
    }
    Ok(max_ratio)
}
