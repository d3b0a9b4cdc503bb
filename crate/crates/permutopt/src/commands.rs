//! Implementations behind the CLI subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;

use permutopt_core::analysis::IccVariant;
use permutopt_core::optimizers::RunRecord;
use permutopt_core::problems::ProblemConfig;

use crate::artifacts::{find_run_records, write_json};
use crate::config::load_config;
use crate::error::HarnessError;
use crate::execute::{execute, icc_over_runs, ExecutionReport};
use crate::svg::{emit_svg, PlotSeries, PlotSpec};

fn config_dir(config_path: &Path) -> PathBuf {
    config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// `permutopt run <config>`: executes the full matrix and writes run
/// records, the summary CSV, plots, and any toggled analyses.
pub fn cli_run(
    config_path: &Path,
    workers: Option<usize>,
    out: Option<&Path>,
    jsonl: bool,
) -> Result<ExecutionReport, HarnessError> {
    let config = load_config(config_path)?;
    let report = execute(&config, &config_dir(config_path), workers, out, jsonl, false)?;
    for completed in &report.runs {
        let status = match &completed.error {
            None => "ok".to_string(),
            Some(message) => format!("ABORTED ({message})"),
        };
        println!(
            "{}/{}/seed {}: {} iterations, {}",
            completed.problem,
            completed.label,
            completed.seed,
            completed.record.iterations(),
            status
        );
    }
    println!(
        "wrote {} run records under {} ({} failures)",
        report.runs.len(),
        report.out_root.display(),
        report.failures
    );
    Ok(report)
}

/// `permutopt coverage <config>`: same matrix, but requires a grid-friendly
/// problem, forces trajectory capture, and emits coverage artifacts.
pub fn cli_coverage(
    config_path: &Path,
    workers: Option<usize>,
    out: Option<&Path>,
) -> Result<ExecutionReport, HarnessError> {
    let config = load_config(config_path)?;
    for entry in &config.problems {
        let ok = matches!(&entry.spec, ProblemConfig::MultiWell { dim, .. } if *dim <= 3);
        if !ok {
            return Err(HarnessError::ConfigInvalid {
                path: config_path.to_path_buf(),
                message: format!(
                    "coverage needs a multiwell problem of dimension <= 3, got '{}'",
                    entry.display_name()
                ),
            });
        }
    }
    let report = execute(&config, &config_dir(config_path), workers, out, false, true)?;
    for path in &report.coverage_paths {
        println!("coverage curve: {}", path.display());
    }
    println!(
        "coverage artifacts under {} ({} failures)",
        report.out_root.display(),
        report.failures
    );
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct IccOutcome {
    pub selected_variant: String,
    pub selected_value: f64,
    pub one_way_value: f64,
    pub two_way_value: f64,
    pub subjects: usize,
    pub raters: usize,
    pub path: PathBuf,
}

/// `permutopt icc <dir>`: assembles the final-K loss table from every
/// `run.json` under the directory and reports both single-measure ICCs.
pub fn cli_icc(dir: &Path, variant: IccVariant, final_k: usize) -> Result<IccOutcome, HarnessError> {
    let paths = find_run_records(dir)?;
    if paths.len() < 2 {
        return Err(HarnessError::IccInput(format!(
            "found {} run records under {}, need at least 2",
            paths.len(),
            dir.display()
        )));
    }
    let mut loaded: Vec<(String, u64, RunRecord)> = Vec::new();
    for path in &paths {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let record: RunRecord =
            serde_json::from_str(&text).map_err(|e| HarnessError::IccInput(format!(
                "{}: {e}",
                path.display()
            )))?;
        // Subject identity comes from the artifact layout:
        // .../<problem>/<optimizer>/<seed>/run.json
        let problem = path
            .ancestors()
            .nth(3)
            .and_then(Path::file_name)
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "problem".to_string());
        loaded.push((problem, record.seed, record));
    }
    let entries: Vec<(&str, u64, &RunRecord)> = loaded
        .iter()
        .map(|(p, s, r)| (p.as_str(), *s, r))
        .collect();
    let (one_way, two_way, subjects, raters) = icc_over_runs(&entries, final_k)?;

    #[derive(Serialize)]
    struct IccFile<'a> {
        final_k: usize,
        subjects: usize,
        raters: usize,
        subject_keys: &'a [String],
        rater_labels: &'a [String],
        one_way: &'a permutopt_core::analysis::IccReport,
        two_way: &'a permutopt_core::analysis::IccReport,
        selected_variant: &'a str,
    }
    let selected = match variant {
        IccVariant::OneWay => ("ICC(1,1)", one_way.value),
        IccVariant::TwoWay => ("ICC(2,1)", two_way.value),
    };
    let path = dir.join("icc.json");
    write_json(
        &path,
        &IccFile {
            final_k,
            subjects: subjects.len(),
            raters: raters.len(),
            subject_keys: &subjects,
            rater_labels: &raters,
            one_way: &one_way,
            two_way: &two_way,
            selected_variant: selected.0,
        },
    )?;
    println!(
        "ICC(1,1) = {:.6}, ICC(2,1) = {:.6} over {} subjects x {} optimizers -> {}",
        one_way.value,
        two_way.value,
        subjects.len(),
        raters.len(),
        path.display()
    );
    Ok(IccOutcome {
        selected_variant: selected.0.to_string(),
        selected_value: selected.1,
        one_way_value: one_way.value,
        two_way_value: two_way.value,
        subjects: subjects.len(),
        raters: raters.len(),
        path,
    })
}

/// `permutopt plot <run.json>...`: overlays the loss curves of the given
/// records in one SVG.
pub fn cli_plot(run_paths: &[PathBuf], out: &Path) -> Result<PathBuf, HarnessError> {
    if run_paths.is_empty() {
        return Err(HarnessError::Plot("no run records given".into()));
    }
    let mut series = Vec::new();
    let mut all_positive = true;
    for path in run_paths {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let record: RunRecord = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Plot(format!("{}: {e}", path.display())))?;
        if record.losses.is_empty() {
            return Err(HarnessError::Plot(format!(
                "{} has no recorded iterations",
                path.display()
            )));
        }
        all_positive &= record.losses.iter().all(|&l| l > 0.0);
        series.push(PlotSeries {
            label: format!("{} (seed {})", record.config.setup.label, record.seed),
            xs: (1..=record.iterations()).map(|i| i as f64).collect(),
            ys: record.losses.clone(),
        });
    }
    let spec = PlotSpec {
        title: "loss".into(),
        x_label: "iteration".into(),
        y_label: "loss".into(),
        log_x: false,
        log_y: all_positive,
        series,
    };
    crate::artifacts::write_string(out, &emit_svg(&spec)?)?;
    println!("wrote {}", out.display());
    Ok(out.to_path_buf())
}
