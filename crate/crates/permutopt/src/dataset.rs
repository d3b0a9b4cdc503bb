//! CSV dataset ingestion for logistic regression.
//!
//! Expected layout: label (0 or 1) in the first column, numeric features
//! after. Features are z-score normalized per column; zero-variance columns
//! normalize to all zeros.

use std::fs;
use std::path::Path;

use permutopt_core::numkit::DenseMatrix;
use permutopt_core::problems::LogisticProblem;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub rows: usize,
    pub feature_columns: usize,
}

/// Loads and normalizes a dataset file. `has_header` skips the first line.
pub fn load_dataset_csv(
    path: &Path,
    has_header: bool,
    l2_weight: f64,
) -> Result<(LogisticProblem, DatasetInfo), HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_dataset(&text, path, has_header, l2_weight)
}

fn parse_dataset(
    text: &str,
    path: &Path,
    has_header: bool,
    l2_weight: f64,
) -> Result<(LogisticProblem, DatasetInfo), HarnessError> {
    let invalid = |message: String| HarnessError::DatasetInvalid {
        path: path.to_path_buf(),
        message,
    };
    let mut labels: Vec<f64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line_ix, line) in text.lines().enumerate() {
        if has_header && line_ix == 0 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let row_no = line_ix + 1;
        let mut cells = Vec::new();
        for (col_ix, cell) in line.split(',').enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| HarnessError::DatasetCell {
                path: path.to_path_buf(),
                row: row_no,
                column: col_ix + 1,
            })?;
            cells.push(value);
        }
        if cells.len() < 2 {
            return Err(invalid(format!(
                "row {row_no} needs a label and at least one feature"
            )));
        }
        let label = cells[0];
        if label != 0.0 && label != 1.0 {
            return Err(invalid(format!(
                "row {row_no}: label {label} is not 0 or 1"
            )));
        }
        if let Some(prev) = rows.first() {
            if cells.len() - 1 != prev.len() {
                return Err(invalid(format!(
                    "row {row_no} has {} features, expected {}",
                    cells.len() - 1,
                    prev.len()
                )));
            }
        }
        labels.push(label);
        rows.push(cells[1..].to_vec());
    }
    if rows.is_empty() {
        return Err(invalid("no data rows".into()));
    }

    let n = rows.len();
    let d = rows[0].len();
    // Per-feature z-score with the population standard deviation.
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        for row in rows.iter_mut() {
            row[j] = if std == 0.0 { 0.0 } else { (row[j] - mean) / std };
        }
    }
    let features = DenseMatrix::from_rows(&rows)?;
    let problem = LogisticProblem::new(features, labels, l2_weight)?;
    Ok((
        problem,
        DatasetInfo {
            rows: n,
            feature_columns: d,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use permutopt_core::problems::Objective;

    fn parse(text: &str, header: bool) -> Result<(LogisticProblem, DatasetInfo), HarnessError> {
        parse_dataset(text, Path::new("toy.csv"), header, 0.0)
    }

    #[test]
    fn toy_csv_loads() {
        let (problem, info) = parse("1,0.5,2.0\n0,1.5,1.0\n1,0.25,3.0\n0,2.0,0.5\n", false).unwrap();
        assert_eq!(info.rows, 4);
        assert_eq!(info.feature_columns, 2);
        assert_eq!(problem.samples(), 4);
    }

    #[test]
    fn constant_feature_normalizes_to_zeros() {
        let (problem, _) = parse("1,7.0,2.0\n0,7.0,1.0\n", false).unwrap();
        let w = vec![1.0, 0.0];
        // Only the constant column contributes through w[0]; margin is 0
        // for every sample, so the loss is exactly ln 2.
        let loss = problem.loss(&w);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let err = parse("1,0.5\n0,abc\n", false).unwrap_err();
        match err {
            HarnessError::DatasetCell { row, column, .. } => {
                assert_eq!((row, column), (2, 2));
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn empty_file_is_rejected() {
        assert!(parse("", false).is_err());
        assert!(parse("label,f1\n", true).is_err());
    }

    #[test]
    fn header_is_skipped_when_flagged() {
        let (_, info) = parse("label,f1\n1,0.5\n0,1.5\n", true).unwrap();
        assert_eq!(info.rows, 2);
    }

    #[test]
    fn bad_label_is_rejected() {
        assert!(parse("2,0.5\n", false).is_err());
    }
}
