//! Replay checks over recorded permutation events.

use alloc::format;

use crate::error::CoreError;
use crate::numkit::l2_distance;
use crate::optimizers::RunRecord;

/// Replays every recorded permutation event against the stored trajectory
/// and verifies two exact identities:
///
/// - the recorded pre/post parameter norms agree within 1e-12;
/// - the reordering contributes nothing to distances: with `y` a stored
///   reference vector, `||R(x) - R(y)|| == ||x - y||` bit for bit under the
///   same map.
///
/// Requires a record with trajectory capture enabled.
pub fn verify_event_isometry(record: &RunRecord) -> Result<(), CoreError> {
    let trajectory = record.trajectory.as_ref().ok_or_else(|| {
        CoreError::Parameter("event verification needs a stored trajectory".into())
    })?;
    let reference = &record.final_params;
    for event in &record.permutation_events {
        if libm::fabs(event.pre_norm - event.post_norm) > 1e-12 {
            return Err(CoreError::Parameter(format!(
                "event at iteration {} broke norm preservation: {} vs {}",
                event.iteration, event.pre_norm, event.post_norm
            )));
        }
        let post = trajectory.get(event.iteration - 1).ok_or_else(|| {
            CoreError::Parameter(format!(
                "event at iteration {} outside the trajectory",
                event.iteration
            ))
        })?;
        // The trajectory stores the permuted iterate; undo the map to get
        // the pre-permutation point, then replay on the reference.
        let pre = event.map.inverse().apply(post)?;
        let mapped_reference = event.map.apply(reference)?;
        let permuted_distance = l2_distance(post, &mapped_reference);
        let plain_distance = l2_distance(&pre, reference);
        if permuted_distance.to_bits() != plain_distance.to_bits() {
            return Err(CoreError::Parameter(format!(
                "event at iteration {} changed a replayed distance: {} vs {}",
                event.iteration, permuted_distance, plain_distance
            )));
        }
    }
    Ok(())
}
