//! Per-optimizer aggregation of completed runs.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::optimizers::RunRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummaryRow {
    pub label: String,
    pub runs: usize,
    pub mean_final_loss: f64,
    pub std_final_loss: f64,
    pub mean_wall_time_seconds: f64,
    pub std_wall_time_seconds: f64,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var))
}

/// Mean and sample standard deviation of final loss and wall time, grouped
/// by optimizer label. Rows come back in label order.
pub fn summarize_runs(records: &[&RunRecord]) -> Result<Vec<RunSummaryRow>, CoreError> {
    if records.is_empty() {
        return Err(CoreError::Parameter("no runs to summarize".into()));
    }
    let mut groups: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for record in records {
        if record.losses.is_empty() {
            return Err(CoreError::Parameter(
                "cannot summarize a run with no recorded iterations".into(),
            ));
        }
        groups
            .entry(record.config.setup.label.as_str())
            .or_default()
            .push(record);
    }
    Ok(groups
        .into_iter()
        .map(|(label, group)| {
            let losses: Vec<f64> = group.iter().map(|r| r.final_loss().unwrap()).collect();
            let times: Vec<f64> = group.iter().map(|r| r.wall_time_seconds).collect();
            let (mean_final_loss, std_final_loss) = mean_and_sample_std(&losses);
            let (mean_wall_time_seconds, std_wall_time_seconds) = mean_and_sample_std(&times);
            RunSummaryRow {
                label: label.into(),
                runs: group.len(),
                mean_final_loss,
                std_final_loss,
                mean_wall_time_seconds,
                std_wall_time_seconds,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::{OptimizerConfig, RunConfigEcho, RunSetup};
    use alloc::vec;

    fn record(label: &str, final_loss: f64) -> RunRecord {
        RunRecord {
            losses: vec![final_loss],
            grad_norms: vec![0.0],
            displacement_norms: vec![0.0],
            permutation_events: vec![],
            final_params: vec![0.0],
            seed: 1,
            config: RunConfigEcho {
                setup: RunSetup::plain(label, OptimizerConfig::Gd { alpha: 0.01 }),
                problem: None,
                t_max: 1,
                seed: 1,
            },
            wall_time_seconds: 0.0,
            trajectory: None,
        }
    }

    #[test]
    fn single_run_has_zero_std() {
        let r = record("gd", 2.5);
        let rows = summarize_runs(&[&r]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].runs, 1);
        assert_eq!(rows[0].mean_final_loss, 2.5);
        assert_eq!(rows[0].std_final_loss, 0.0);
    }

    #[test]
    fn two_runs_sample_std() {
        let a = record("gd", 1.0);
        let b = record("gd", 3.0);
        let rows = summarize_runs(&[&a, &b]).unwrap();
        assert_eq!(rows[0].mean_final_loss, 2.0);
        assert!((rows[0].std_final_loss - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn empty_input_is_error() {
        assert!(summarize_runs(&[]).is_err());
    }
}
