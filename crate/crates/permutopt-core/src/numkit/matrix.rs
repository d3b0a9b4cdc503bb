//! Row-major dense matrix over `f64`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::vec_ops::{l1_norm, l2_norm};
use super::SeededRng;
use crate::error::CoreError;

/// Row-major dense matrix. The universal carrier for parameters, gradients,
/// and data; all flattening anywhere in the crate uses this row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, CoreError> {
        if rows == 0 || cols == 0 {
            return Err(CoreError::InvalidDimension {
                context: "DenseMatrix::new",
                dim: rows.min(cols),
            });
        }
        if data.len() != rows * cols {
            return Err(CoreError::ShapeMismatch {
                context: "DenseMatrix::new",
                left: format!("{rows}x{cols}"),
                right: format!("len {}", data.len()),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows: rows.max(1),
            cols: cols.max(1),
            data: vec![0.0; rows.max(1) * cols.max(1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, CoreError> {
        let r = rows.len();
        if r == 0 {
            return Err(CoreError::InvalidDimension {
                context: "DenseMatrix::from_rows",
                dim: 0,
            });
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(CoreError::ShapeMismatch {
                    context: "DenseMatrix::from_rows",
                    left: format!("row 0 len {c}"),
                    right: format!("row {i} len {}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        DenseMatrix::new(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Seeded matrix with entries uniform in `[lo, hi)`.
    pub fn random_uniform(rows: usize, cols: usize, rng: &mut SeededRng, lo: f64, hi: f64) -> Self {
        let data = (0..rows * cols).map(|_| rng.range_f64(lo, hi)).collect();
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn shape_string(&self) -> String {
        format!("{}x{}", self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Row-major flattened entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product.
    pub fn mat_mul(&self, other: &DenseMatrix) -> Result<DenseMatrix, CoreError> {
        if self.cols != other.rows {
            return Err(CoreError::ShapeMismatch {
                context: "mat_mul",
                left: self.shape_string(),
                right: other.shape_string(),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let lhs = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(lhs) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, CoreError> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, CoreError> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    pub fn hadamard(&self, other: &DenseMatrix) -> Result<DenseMatrix, CoreError> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        context: &'static str,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix, CoreError> {
        if self.shape() != other.shape() {
            return Err(CoreError::ShapeMismatch {
                context,
                left: self.shape_string(),
                right: other.shape_string(),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Entry-wise `max(0, x)`.
    pub fn relu(&self) -> DenseMatrix {
        self.map(|v| if v > 0.0 { v } else { 0.0 })
    }

    /// Frobenius norm; inherits the order-invariant accumulation of
    /// [`l2_norm`].
    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.data)
    }

    pub fn l1_norm(&self) -> f64 {
        l1_norm(&self.data)
    }

    /// Plain numeric CSV, one line per matrix row. A header row of column
    /// indices is emitted only when `header` is set.
    pub fn to_csv(&self, header: bool) -> String {
        let mut out = String::new();
        if header {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("c{j}"));
            }
            out.push('\n');
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the CSV form produced by [`DenseMatrix::to_csv`]. Errors name
    /// the offending 1-based row and column.
    pub fn from_csv_str(text: &str, has_header: bool) -> Result<Self, CoreError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            if has_header && line_no == 0 {
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::new();
            for (col_no, cell) in line.split(',').enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    CoreError::Parameter(format!(
                        "csv: non-numeric cell at row {}, column {}",
                        line_no + 1,
                        col_no + 1
                    ))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(CoreError::Parameter("csv: no data rows".into()));
        }
        DenseMatrix::from_rows(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_times_matrix_is_matrix() {
        let m = DenseMatrix::from_rows(&[vec![1.5, -2.0], vec![0.25, 7.0]]).unwrap();
        let prod = DenseMatrix::identity(2).mat_mul(&m).unwrap();
        assert_eq!(prod, m);
    }

    #[test]
    fn hand_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let p = a.mat_mul(&b).unwrap();
        assert_eq!(p.as_slice(), &[2.0, 4.0]);
    }

    #[test]
    fn mat_mul_shape_error_names_both_shapes() {
        let a = DenseMatrix::zeros(7, 5);
        let b = DenseMatrix::zeros(4, 3);
        let err = a.mat_mul(&b).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("7x5") && msg.contains("4x3"), "{msg}");
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(DenseMatrix::zeros(3, 3).frobenius_norm(), 0.0);
        let m = DenseMatrix::from_rows(&[vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.frobenius_norm(), 5.0);
        let eye = DenseMatrix::identity(2);
        assert!((eye.frobenius_norm() - core::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn relu_splits_signs() {
        let m = DenseMatrix::from_rows(&[vec![-1.0, 2.0]]).unwrap();
        assert_eq!(m.relu().as_slice(), &[0.0, 2.0]);
        let neg = DenseMatrix::from_rows(&[vec![-3.0, -0.5], vec![-1e9, -0.0]]).unwrap();
        assert!(neg.relu().as_slice().iter().all(|&v| v == 0.0));
        let pos = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.5, 3.0]]).unwrap();
        assert_eq!(pos.relu(), pos);
    }

    #[test]
    fn csv_round_trip() {
        let m = DenseMatrix::from_rows(&[vec![1.0, -2.5], vec![0.125, 4.0]]).unwrap();
        let back = DenseMatrix::from_csv_str(&m.to_csv(false), false).unwrap();
        assert_eq!(back, m);
        let with_header = DenseMatrix::from_csv_str(&m.to_csv(true), true).unwrap();
        assert_eq!(with_header, m);
    }

    #[test]
    fn csv_error_names_cell() {
        let err = DenseMatrix::from_csv_str("1.0,2.0\n3.0,oops\n", false).unwrap_err();
        let msg = alloc::format!("{err}");
        assert!(msg.contains("row 2") && msg.contains("column 2"), "{msg}");
    }
}
