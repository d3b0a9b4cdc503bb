//! Run-matrix execution: (problem x optimizer x seed) in parallel, with
//! deterministic artifacts assembled single-threaded afterwards.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use permutopt_core::analysis::{
    contraction_profile, coverage_report, icc, summarize_runs, verify_event_isometry,
    CoverageConfig, CoverageReport, IccReport, IccVariant,
};
use permutopt_core::numkit::DenseMatrix;
use permutopt_core::optimizers::{run, RunOptions, RunRecord, RunSetup};
use permutopt_core::problems::{Objective, ProblemConfig};

use crate::artifacts::{self, config_hash, run_path, write_json, write_string};
use crate::config::ExperimentConfig;
use crate::dataset::load_dataset_csv;
use crate::error::HarnessError;
use crate::svg::{emit_svg, PlotSeries, PlotSpec};

pub struct CompletedRun {
    pub problem: String,
    pub label: String,
    pub seed: u64,
    pub record: RunRecord,
    pub error: Option<String>,
    pub path: PathBuf,
}

pub struct ExecutionReport {
    pub out_root: PathBuf,
    pub hash: String,
    pub runs: Vec<CompletedRun>,
    pub failures: usize,
    pub summary_path: PathBuf,
    pub plot_paths: Vec<PathBuf>,
    pub coverage_paths: Vec<PathBuf>,
    pub icc_path: Option<PathBuf>,
}

/// Builds the problem an entry describes; CSV-backed problems resolve their
/// path relative to the config file's directory.
pub fn build_problem(
    spec: &ProblemConfig,
    config_dir: &Path,
    run_seed: u64,
) -> Result<Box<dyn Objective>, HarnessError> {
    match spec {
        ProblemConfig::LogisticCsv {
            path,
            l2_weight,
            has_header,
        } => {
            let file = config_dir.join(path);
            let (problem, _) = load_dataset_csv(&file, *has_header, *l2_weight)?;
            Ok(Box::new(problem))
        }
        other => Ok(other.build(run_seed)?),
    }
}

struct Task {
    problem_name: String,
    spec: ProblemConfig,
    setup: RunSetup,
    seed: u64,
}

fn execute_task(
    task: &Task,
    config: &ExperimentConfig,
    config_dir: &Path,
    out_root: &Path,
    jsonl: bool,
    force_trajectory: bool,
) -> Result<CompletedRun, HarnessError> {
    let problem = build_problem(&task.spec, config_dir, task.seed)?;
    let record_trajectory =
        (config.analysis.coverage || force_trajectory) && problem.dim() <= 3;
    let options = RunOptions {
        record_trajectory,
        problem_echo: Some(task.spec.clone()),
    };
    let started = Instant::now();
    let outcome = run(&task.setup, problem.as_ref(), config.t_max, task.seed, &options);
    let elapsed = started.elapsed().as_secs_f64();
    let (mut record, error) = match outcome {
        Ok(record) => (record, None),
        Err(e) => {
            let message = e.to_string();
            match e.partial_record() {
                Some(partial) => (partial.clone(), Some(message)),
                None => return Err(HarnessError::Core(
                    permutopt_core::CoreError::Parameter(message),
                )),
            }
        }
    };
    record.wall_time_seconds = elapsed;
    let path = run_path(out_root, &task.problem_name, &task.setup.label, task.seed);
    write_json(&path, &record)?;
    if jsonl {
        write_string(&path.with_extension("jsonl"), &artifacts::run_jsonl(&record))?;
    }
    Ok(CompletedRun {
        problem: task.problem_name.clone(),
        label: task.setup.label.clone(),
        seed: task.seed,
        record,
        error,
        path,
    })
}

#[derive(Serialize)]
struct ContractionEntry {
    label: String,
    seed: u64,
    stall_iteration: Option<usize>,
    fraction_increasing: f64,
    one_over_sqrt_t: f64,
    twice_abs_best_loss: f64,
    permutation_events: usize,
    event_isometry_verified: Option<bool>,
}

#[derive(Serialize)]
struct CoverageEntry {
    label: String,
    seed: u64,
    #[serde(flatten)]
    report: CoverageReport,
}

#[derive(Serialize)]
struct IccArtifact {
    subjects: usize,
    raters: usize,
    final_k: usize,
    subject_keys: Vec<String>,
    rater_labels: Vec<String>,
    one_way: IccReport,
    two_way: IccReport,
}

/// Mean of the last `k` losses, the per-run scalar entering ICC tables.
fn final_k_mean(record: &RunRecord, k: usize) -> f64 {
    let losses = &record.losses;
    let k = k.max(1).min(losses.len());
    losses[losses.len() - k..].iter().sum::<f64>() / k as f64
}

/// ICC over the (problem, seed) x optimizer table of final-K mean losses.
pub fn icc_over_runs(
    records: &[(&str, u64, &RunRecord)],
    final_k: usize,
) -> Result<(IccReport, IccReport, Vec<String>, Vec<String>), HarnessError> {
    let mut lengths = BTreeMap::new();
    for (_, _, record) in records {
        lengths.insert(record.iterations(), ());
    }
    if lengths.len() > 1 {
        return Err(HarnessError::IccInput(
            "records have unequal loss-list lengths".into(),
        ));
    }
    let mut subjects: Vec<String> = Vec::new();
    let mut raters: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(String, String), f64> = BTreeMap::new();
    for (problem, seed, record) in records {
        let subject = format!("{problem}/{seed}");
        let rater = record.config.setup.label.clone();
        if !subjects.contains(&subject) {
            subjects.push(subject.clone());
        }
        if !raters.contains(&rater) {
            raters.push(rater.clone());
        }
        cells.insert((subject, rater), final_k_mean(record, final_k));
    }
    subjects.sort();
    raters.sort();
    if subjects.len() < 2 || raters.len() < 2 {
        return Err(HarnessError::IccInput(format!(
            "need at least 2 subjects and 2 optimizers, got {}x{}",
            subjects.len(),
            raters.len()
        )));
    }
    let mut table = DenseMatrix::zeros(subjects.len(), raters.len());
    for (i, s) in subjects.iter().enumerate() {
        for (j, r) in raters.iter().enumerate() {
            let value = cells.get(&(s.clone(), r.clone())).ok_or_else(|| {
                HarnessError::IccInput(format!("missing run for subject {s}, optimizer {r}"))
            })?;
            table.set(i, j, *value);
        }
    }
    let one_way = icc(&table, IccVariant::OneWay)?;
    let two_way = icc(&table, IccVariant::TwoWay)?;
    Ok((one_way, two_way, subjects, raters))
}

/// Runs the whole experiment matrix and writes every artifact.
pub fn execute(
    config: &ExperimentConfig,
    config_dir: &Path,
    workers: Option<usize>,
    out_override: Option<&Path>,
    jsonl: bool,
    force_trajectory: bool,
) -> Result<ExecutionReport, HarnessError> {
    let hash = config_hash(config);
    let out_base = out_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| config_dir.join(&config.output_dir));
    let out_root = out_base.join(&hash);

    let mut tasks = Vec::new();
    for entry in &config.problems {
        for spec in &config.optimizers {
            let setup = spec.resolve()?;
            for &seed in &config.seeds {
                tasks.push(Task {
                    problem_name: entry.display_name(),
                    spec: entry.spec.clone(),
                    setup: setup.clone(),
                    seed,
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::ConfigInvalid {
            path: config_dir.to_path_buf(),
            message: format!("worker pool: {e}"),
        })?;
    let results: Vec<Result<CompletedRun, HarnessError>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|task| execute_task(task, config, config_dir, &out_root, jsonl, force_trajectory))
            .collect()
    });
    let mut runs = Vec::with_capacity(results.len());
    for result in results {
        runs.push(result?);
    }
    runs.sort_by(|a, b| {
        (&a.problem, &a.label, a.seed).cmp(&(&b.problem, &b.label, b.seed))
    });
    let failures = runs.iter().filter(|r| r.error.is_some()).count();

    // Summary CSV over successful runs, grouped per problem.
    let mut summary_rows = Vec::new();
    let mut by_problem: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
    for completed in runs.iter().filter(|r| r.error.is_none()) {
        by_problem
            .entry(completed.problem.as_str())
            .or_default()
            .push(&completed.record);
    }
    for (problem, records) in &by_problem {
        for row in summarize_runs(records)? {
            summary_rows.push((problem.to_string(), row));
        }
    }
    let summary_path = out_root.join("summary.csv");
    write_string(&summary_path, &artifacts::summary_csv(&summary_rows))?;

    // One loss-curve plot per problem: per-label mean loss across seeds.
    let mut plot_paths = Vec::new();
    for (problem, records) in &by_problem {
        let mut by_label: BTreeMap<&str, Vec<&RunRecord>> = BTreeMap::new();
        for record in records {
            by_label
                .entry(record.config.setup.label.as_str())
                .or_default()
                .push(record);
        }
        let mut series = Vec::new();
        let mut all_positive = true;
        for (label, group) in &by_label {
            let t = group.iter().map(|r| r.iterations()).min().unwrap_or(0);
            if t == 0 {
                continue;
            }
            let ys: Vec<f64> = (0..t)
                .map(|i| group.iter().map(|r| r.losses[i]).sum::<f64>() / group.len() as f64)
                .collect();
            all_positive &= ys.iter().all(|&y| y > 0.0);
            series.push(PlotSeries {
                label: label.to_string(),
                xs: (1..=t).map(|i| i as f64).collect(),
                ys,
            });
        }
        if series.is_empty() {
            continue;
        }
        let spec = PlotSpec {
            title: format!("{} loss", problem),
            x_label: "iteration".into(),
            y_label: "loss".into(),
            log_x: false,
            log_y: all_positive,
            series,
        };
        let path = out_root.join(format!("plot_{problem}.svg"));
        write_string(&path, &emit_svg(&spec)?)?;
        plot_paths.push(path);
    }

    // Contraction diagnostics.
    if config.analysis.contraction {
        for (problem, _) in &by_problem {
            let mut entries = Vec::new();
            for completed in runs.iter().filter(|r| {
                r.error.is_none() && r.problem == *problem && r.record.iterations() >= 3
            }) {
                let profile = contraction_profile(&completed.record)?;
                let verified = completed
                    .record
                    .trajectory
                    .as_ref()
                    .map(|_| verify_event_isometry(&completed.record).is_ok());
                entries.push(ContractionEntry {
                    label: completed.label.clone(),
                    seed: completed.seed,
                    stall_iteration: profile.stall_iteration,
                    fraction_increasing: profile.fraction_increasing,
                    one_over_sqrt_t: profile.rate_bound.one_over_sqrt_t,
                    twice_abs_best_loss: profile.rate_bound.twice_abs_best_loss,
                    permutation_events: completed.record.permutation_events.len(),
                    event_isometry_verified: verified,
                });
            }
            write_json(&out_root.join(problem).join("analysis.json"), &entries)?;
        }
    }

    // Coverage curves for low-dimensional problems with stored trajectories.
    let mut coverage_paths = Vec::new();
    if config.analysis.coverage || force_trajectory {
        for entry in &config.problems {
            let problem_name = entry.display_name();
            let probe = build_problem(&entry.spec, config_dir, config.seeds[0])?;
            if probe.dim() > 3 {
                continue;
            }
            let domain = probe.domain();
            let gbest = probe.global_optimum();
            let coverage_config = CoverageConfig {
                cells_per_dim: config.analysis.coverage_cells,
                delta: config.analysis.coverage_delta,
                delta_gbest: config.analysis.coverage_delta,
            };
            let mut entries = Vec::new();
            let mut curves: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
            for completed in runs.iter().filter(|r| {
                r.error.is_none() && r.problem == problem_name && r.record.trajectory.is_some()
            }) {
                let report = coverage_report(
                    &completed.record,
                    &domain,
                    gbest.as_deref(),
                    &coverage_config,
                )?;
                curves
                    .entry(completed.label.clone())
                    .or_default()
                    .push(report.fractions.clone());
                entries.push(CoverageEntry {
                    label: completed.label.clone(),
                    seed: completed.seed,
                    report,
                });
            }
            if entries.is_empty() {
                continue;
            }
            write_json(&out_root.join(&problem_name).join("coverage.json"), &entries)?;
            let mut series = Vec::new();
            for (label, group) in &curves {
                let t = group.iter().map(Vec::len).min().unwrap_or(0);
                if t == 0 {
                    continue;
                }
                let ys: Vec<f64> = (0..t)
                    .map(|i| group.iter().map(|c| c[i]).sum::<f64>() / group.len() as f64)
                    .collect();
                series.push(PlotSeries {
                    label: label.clone(),
                    xs: (1..=t).map(|i| i as f64).collect(),
                    ys,
                });
            }
            let spec = PlotSpec {
                title: format!("{problem_name} covered fraction"),
                x_label: "iteration".into(),
                y_label: "covered fraction".into(),
                log_x: false,
                log_y: false,
                series,
            };
            let path = out_root.join(format!("coverage_{problem_name}.svg"));
            write_string(&path, &emit_svg(&spec)?)?;
            coverage_paths.push(path);
        }
    }

    // ICC over the run matrix.
    let mut icc_path = None;
    if config.analysis.icc {
        let entries: Vec<(&str, u64, &RunRecord)> = runs
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| (r.problem.as_str(), r.seed, &r.record))
            .collect();
        let (one_way, two_way, subjects, raters) =
            icc_over_runs(&entries, config.analysis.icc_final_k)?;
        let artifact = IccArtifact {
            subjects: subjects.len(),
            raters: raters.len(),
            final_k: config.analysis.icc_final_k,
            subject_keys: subjects,
            rater_labels: raters,
            one_way,
            two_way,
        };
        let path = out_root.join("icc.json");
        write_json(&path, &artifact)?;
        icc_path = Some(path);
    }

    Ok(ExecutionReport {
        out_root,
        hash,
        runs,
        failures,
        summary_path,
        plot_paths,
        coverage_paths,
        icc_path,
    })
}
