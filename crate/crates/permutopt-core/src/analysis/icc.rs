//! Intra-class correlation from ANOVA mean squares.
//!
//! The table is `n` subjects (rows) by `k` measurements (columns). The
//! two-way decomposition is
//!
//! ```text
//! SS_total = sum_ij (x_ij - grand)^2
//! SS_rows  = k * sum_i (rowmean_i - grand)^2      MS_between = SS_rows / (n - 1)
//! SS_cols  = n * sum_j (colmean_j - grand)^2      MS_raters  = SS_cols / (k - 1)
//! SS_err   = SS_total - SS_rows - SS_cols         MS_error   = SS_err / ((n-1)(k-1))
//! MS_within = (SS_cols + SS_err) / (n * (k - 1))
//! ```
//!
//! from which the single-measure coefficients are
//!
//! ```text
//! ICC(1,1) = (MS_between - MS_within) / (MS_between + (k-1) * MS_within)
//! ICC(2,1) = (MS_between - MS_error)
//!          / (MS_between + (k-1) * MS_error + k * (MS_raters - MS_error) / n)
//! ```

use alloc::format;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::numkit::DenseMatrix;

/// Single-measure ICC model: one-way random `(1,1)` or two-way random
/// `(2,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IccVariant {
    OneWay,
    TwoWay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccReport {
    pub variant: IccVariant,
    pub value: f64,
    pub ms_between: f64,
    pub ms_within: f64,
    pub ms_raters: f64,
    pub ms_error: f64,
    pub subjects: usize,
    pub raters: usize,
}

/// Computes the requested ICC over an `n x k` measurement table.
pub fn icc(table: &DenseMatrix, variant: IccVariant) -> Result<IccReport, CoreError> {
    let (n, k) = table.shape();
    if n < 2 || k < 2 {
        return Err(CoreError::Parameter(format!(
            "icc needs at least 2 subjects and 2 measurements, got {n}x{k}"
        )));
    }
    let nf = n as f64;
    let kf = k as f64;
    let grand = table.as_slice().iter().sum::<f64>() / (nf * kf);
    let row_means: alloc::vec::Vec<f64> = (0..n)
        .map(|i| table.row(i).iter().sum::<f64>() / kf)
        .collect();
    let col_means: alloc::vec::Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| table.get(i, j)).sum::<f64>() / nf)
        .collect();

    let mut ss_total = 0.0;
    for i in 0..n {
        for j in 0..k {
            let d = table.get(i, j) - grand;
            ss_total += d * d;
        }
    }
    if ss_total == 0.0 {
        return Err(CoreError::DegenerateData(
            "zero total variance in measurement table".into(),
        ));
    }
    let ss_rows = kf * row_means.iter().map(|&m| (m - grand) * (m - grand)).sum::<f64>();
    let ss_cols = nf * col_means.iter().map(|&m| (m - grand) * (m - grand)).sum::<f64>();
    let ss_err = ss_total - ss_rows - ss_cols;

    let ms_between = ss_rows / (nf - 1.0);
    let ms_raters = ss_cols / (kf - 1.0);
    let ms_error = ss_err / ((nf - 1.0) * (kf - 1.0));
    let ms_within = (ss_cols + ss_err) / (nf * (kf - 1.0));

    let value = match variant {
        IccVariant::OneWay => {
            let denom = ms_between + (kf - 1.0) * ms_within;
            if denom == 0.0 {
                return Err(CoreError::DegenerateData(
                    "zero denominator in one-way ICC".into(),
                ));
            }
            (ms_between - ms_within) / denom
        }
        IccVariant::TwoWay => {
            let denom = ms_between + (kf - 1.0) * ms_error + kf * (ms_raters - ms_error) / nf;
            if denom == 0.0 {
                return Err(CoreError::DegenerateData(
                    "zero denominator in two-way ICC".into(),
                ));
            }
            (ms_between - ms_error) / denom
        }
    };
    Ok(IccReport {
        variant,
        value,
        ms_between,
        ms_within,
        ms_raters,
        ms_error,
        subjects: n,
        raters: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::SeededRng;
    use alloc::vec;
    use alloc::vec::Vec;

    #[test]
    fn perfect_agreement_is_exactly_one() {
        // Rows constant across columns, distinct across rows: the within
        // and error mean squares vanish identically.
        let rows: Vec<Vec<f64>> = (1..=5).map(|r| vec![r as f64; 4]).collect();
        let table = DenseMatrix::from_rows(&rows).unwrap();
        assert_eq!(icc(&table, IccVariant::OneWay).unwrap().value, 1.0);
        assert_eq!(icc(&table, IccVariant::TwoWay).unwrap().value, 1.0);
    }

    #[test]
    fn pure_noise_is_near_zero() {
        let mut rng = SeededRng::new(31);
        let table = DenseMatrix::from_fn(200, 3, |_, _| rng.normal());
        for variant in [IccVariant::OneWay, IccVariant::TwoWay] {
            let value = icc(&table, variant).unwrap().value;
            assert!(value.abs() < 0.05, "{variant:?}: {value}");
        }
    }

    #[test]
    fn constant_table_is_degenerate() {
        let table = DenseMatrix::from_rows(&[vec![2.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(
            icc(&table, IccVariant::TwoWay),
            Err(CoreError::DegenerateData(_))
        ));
    }

    #[test]
    fn tiny_tables_are_rejected() {
        let table = DenseMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(icc(&table, IccVariant::OneWay).is_err());
    }

    #[test]
    fn rescaling_leaves_icc_unchanged() {
        // Doubling every measurement scales each mean square by exactly 4,
        // which cancels in the ratio.
        let table = DenseMatrix::from_rows(&[
            vec![9.0, 10.0, 8.0],
            vec![7.5, 8.0, 7.0],
            vec![4.0, 4.5, 3.5],
            vec![8.5, 8.0, 8.0],
        ])
        .unwrap();
        let base = icc(&table, IccVariant::OneWay).unwrap().value;
        let scaled = icc(&table.scale(2.0), IccVariant::OneWay).unwrap().value;
        assert_eq!(base.to_bits(), scaled.to_bits());
    }
}
