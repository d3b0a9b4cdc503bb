//! Artifact persistence: deterministic paths, JSON/JSONL/CSV writers, and
//! run-record discovery.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use permutopt_core::analysis::RunSummaryRow;
use permutopt_core::optimizers::RunRecord;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Short content hash of the parsed config; the root directory of every
/// artifact tree, so re-running an edited config never collides.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut hex = String::with_capacity(12);
    for byte in digest.iter().take(6) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

/// `<out>/<hash>/<problem>/<optimizer>/<seed>/run.json`
pub fn run_path(root: &Path, problem: &str, label: &str, seed: u64) -> PathBuf {
    root.join(problem).join(label).join(seed.to_string()).join("run.json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    write_string(path, &text)
}

pub fn write_string(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Streaming form: one JSON line per iteration after a metadata line.
pub fn run_jsonl(record: &RunRecord) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{}\n",
        serde_json::json!({
            "label": record.config.setup.label,
            "seed": record.seed,
            "t_max": record.config.t_max,
            "iterations": record.iterations(),
        })
    ));
    let mut events = record.permutation_events.iter().peekable();
    for t in 0..record.iterations() {
        let event = match events.peek() {
            Some(e) if e.iteration == t + 1 => {
                let e = events.next().unwrap();
                serde_json::to_value(e).expect("event serializes")
            }
            _ => serde_json::Value::Null,
        };
        out.push_str(&format!(
            "{}\n",
            serde_json::json!({
                "t": t + 1,
                "loss": record.losses[t],
                "grad_norm": record.grad_norms[t],
                "displacement": record.displacement_norms[t],
                "event": event,
            })
        ));
    }
    out
}

/// Summary table as CSV, one row per (problem, optimizer label).
pub fn summary_csv(rows: &[(String, RunSummaryRow)]) -> String {
    let mut out = String::from(
        "problem,optimizer,runs,mean_final_loss,std_final_loss,mean_wall_time_s,std_wall_time_s\n",
    );
    for (problem, row) in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            problem,
            row.label,
            row.runs,
            row.mean_final_loss,
            row.std_final_loss,
            row.mean_wall_time_seconds,
            row.std_wall_time_seconds
        ));
    }
    out
}

/// All `run.json` files under `dir`, sorted for determinism.
pub fn find_run_records(dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut found = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(current) = stack.pop() {
        let entries = fs::read_dir(&current).map_err(|e| HarnessError::io(&current, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| HarnessError::io(&current, e))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n == "run.json") {
                found.push(path);
            }
        }
    }
    found.sort();
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    #[test]
    fn hash_is_stable_and_short() {
        let config = ExperimentConfig::from_str_validated(
            r#"{"name":"x","problem":{"type":"quadratic","dim":2,"seed":1},
                "optimizers":[{"method":"gd"}],"seeds":[1]}"#,
            Path::new("x.json"),
        )
        .unwrap();
        let a = config_hash(&config);
        let b = config_hash(&config);
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn run_paths_are_unique_per_cell() {
        let root = Path::new("out/abc");
        let a = run_path(root, "p", "adam", 1);
        let b = run_path(root, "p", "adam", 2);
        let c = run_path(root, "p", "gd", 1);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert!(a.ends_with("p/adam/1/run.json"));
    }
}
