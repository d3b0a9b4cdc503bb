//! Displacement-ratio diagnostics: how fast a run's steps shrink, and
//! where it stalls.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::optimizers::RunRecord;

/// Displacements below this are treated as a stall, not a ratio.
pub const STALL_EPS: f64 = 1e-12;

/// Diagnostic pair logged for every profile: the `1/sqrt(T)` rate marker
/// next to twice the absolute best recorded loss. Reported only; nothing
/// is asserted about their relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBoundDiagnostic {
    pub one_over_sqrt_t: f64,
    pub twice_abs_best_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionProfile {
    /// `d_{t+1} / d_t` per step; `None` marks a stalled denominator
    /// (displacement below [`STALL_EPS`]).
    pub ratios: Vec<Option<f64>>,
    /// First iteration whose displacement fell below [`STALL_EPS`].
    pub stall_iteration: Option<usize>,
    /// Fraction of defined ratios above 1; descriptive, never asserted.
    pub fraction_increasing: f64,
    pub rate_bound: RateBoundDiagnostic,
}

/// Profiles the displacement sequence of a completed run.
pub fn contraction_profile(record: &RunRecord) -> Result<ContractionProfile, CoreError> {
    let d = &record.displacement_norms;
    if d.len() < 3 {
        return Err(CoreError::Parameter(alloc::format!(
            "contraction profile needs at least 3 iterations, got {}",
            d.len()
        )));
    }
    let mut ratios = Vec::with_capacity(d.len() - 1);
    for w in d.windows(2) {
        if w[0] < STALL_EPS {
            ratios.push(None);
        } else {
            ratios.push(Some(w[1] / w[0]));
        }
    }
    let stall_iteration = d.iter().position(|&v| v < STALL_EPS).map(|i| i + 1);
    let defined: Vec<f64> = ratios.iter().filter_map(|r| *r).collect();
    let fraction_increasing = if defined.is_empty() {
        0.0
    } else {
        defined.iter().filter(|&&r| r > 1.0).count() as f64 / defined.len() as f64
    };
    let best = record
        .losses
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(ContractionProfile {
        ratios,
        stall_iteration,
        fraction_increasing,
        rate_bound: RateBoundDiagnostic {
            one_over_sqrt_t: 1.0 / libm::sqrt(record.iterations() as f64),
            twice_abs_best_loss: 2.0 * libm::fabs(best),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{OptimizerConfig, RunConfigEcho, RunSetup};
    use alloc::vec;

    fn record_with_displacements(d: Vec<f64>) -> RunRecord {
        let n = d.len();
        RunRecord {
            losses: vec![1.0; n],
            grad_norms: vec![1.0; n],
            displacement_norms: d,
            permutation_events: vec![],
            final_params: vec![0.0],
            seed: 0,
            config: RunConfigEcho {
                setup: RunSetup::plain("gd", OptimizerConfig::Gd { alpha: 0.01 }),
                problem: None,
                t_max: n,
                seed: 0,
            },
            wall_time_seconds: 0.0,
            trajectory: None,
        }
    }

    #[test]
    fn geometric_sequence_has_constant_ratio() {
        let d: Vec<f64> = (1..=10).map(|t| libm::pow(2.0, -(t as f64))).collect();
        let profile = contraction_profile(&record_with_displacements(d)).unwrap();
        assert!(profile
            .ratios
            .iter()
            .all(|r| (r.unwrap() - 0.5).abs() < 1e-15));
        assert_eq!(profile.stall_iteration, None);
        assert_eq!(profile.fraction_increasing, 0.0);
    }

    #[test]
    fn converged_run_reports_stall_marker() {
        let profile =
            contraction_profile(&record_with_displacements(vec![0.5, 0.25, 0.0, 0.0])).unwrap();
        assert_eq!(profile.stall_iteration, Some(3));
        assert_eq!(profile.ratios[2], None);
    }

    #[test]
    fn short_runs_are_rejected() {
        assert!(contraction_profile(&record_with_displacements(vec![1.0, 0.5])).is_err());
    }

    #[test]
    fn profile_is_translation_invariant() {
        // Profiles depend only on displacements, which a global translation
        // of the trajectory leaves untouched; same record, same profile.
        let d = vec![0.5, 0.4, 0.45, 0.3];
        let a = contraction_profile(&record_with_displacements(d.clone())).unwrap();
        let b = contraction_profile(&record_with_displacements(d)).unwrap();
        assert_eq!(a, b);
    }
}
