//! Deep nonlinear matrix factorization.
//!
//! Factorizes a data matrix `S` as `(X_1 ... X_k) * relu(Y) + Z`. Gradient
//! methods minimize the penalized relaxation
//! `||model - S||_F^2 / ||S||_F^2 + l1_weight * ||Z||_1`; the reported
//! metric is the penalty-free relative reconstruction error. Columns of `S`
//! act as stochastic components for variance-reduced methods.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::{DomainBox, Objective};
use crate::error::CoreError;
use crate::numkit::{sum_squares, DenseMatrix, SeededRng};

pub struct DnmfProblem {
    s: DenseMatrix,
    x_shapes: Vec<(usize, usize)>,
    y_shape: (usize, usize),
    l1_weight: f64,
    s_norm_sq: f64,
    blocks: Vec<Range<usize>>,
    dim: usize,
}

struct Parts {
    xs: Vec<DenseMatrix>,
    y: DenseMatrix,
    z: DenseMatrix,
}

/// Prefix products `X_1 .. X_i` for `i = 1..=k`.
pub(crate) fn prefix_products(xs: &[DenseMatrix]) -> Vec<DenseMatrix> {
    let mut out: Vec<DenseMatrix> = Vec::with_capacity(xs.len());
    for x in xs {
        let next = match out.last() {
            Some(p) => p.mat_mul(x).expect("validated chain"),
            None => x.clone(),
        };
        out.push(next);
    }
    out
}

/// `suffix[i] = X_{i+1} .. X_k * H`, so `suffix[k] = H` and `suffix[0]` is
/// the full reconstruction.
pub(crate) fn suffix_products(xs: &[DenseMatrix], h: &DenseMatrix) -> Vec<DenseMatrix> {
    let k = xs.len();
    let mut suffix: Vec<DenseMatrix> = vec![h.clone(); k + 1];
    for i in (0..k).rev() {
        suffix[i] = xs[i].mat_mul(&suffix[i + 1]).expect("validated chain");
    }
    suffix
}

#[inline]
fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl DnmfProblem {
    /// Chain with `layers` weight matrices: `X_1` is `m x rank`, deeper
    /// `X_i` are `rank x rank`, `Y` is `rank x n`, `Z` matches `S`.
    pub fn new(
        s: DenseMatrix,
        layers: usize,
        rank: usize,
        l1_weight: f64,
    ) -> Result<Self, CoreError> {
        if layers == 0 || rank == 0 {
            return Err(CoreError::InvalidDimension {
                context: "DnmfProblem::new",
                dim: layers.min(rank),
            });
        }
        let (m, n) = s.shape();
        let mut x_shapes = Vec::with_capacity(layers);
        x_shapes.push((m, rank));
        for _ in 1..layers {
            x_shapes.push((rank, rank));
        }
        Self::with_shapes(s, x_shapes, (rank, n), l1_weight)
    }

    /// Three-layer stacked variant used as the deep-network substitute.
    pub fn stacked(s: DenseMatrix, rank: usize, l1_weight: f64) -> Result<Self, CoreError> {
        DnmfProblem::new(s, 3, rank, l1_weight)
    }

    /// General constructor with explicit factor shapes.
    pub fn with_shapes(
        s: DenseMatrix,
        x_shapes: Vec<(usize, usize)>,
        y_shape: (usize, usize),
        l1_weight: f64,
    ) -> Result<Self, CoreError> {
        if x_shapes.is_empty() {
            return Err(CoreError::InvalidDimension {
                context: "DnmfProblem::with_shapes",
                dim: 0,
            });
        }
        if !(l1_weight.is_finite() && l1_weight >= 0.0) {
            return Err(CoreError::Parameter(format!(
                "l1_weight must be finite and nonnegative, got {l1_weight}"
            )));
        }
        let (m, n) = s.shape();
        if x_shapes[0].0 != m {
            return Err(CoreError::ShapeMismatch {
                context: "DnmfProblem::with_shapes",
                left: s.shape_string(),
                right: format!("X_1 {}x{}", x_shapes[0].0, x_shapes[0].1),
            });
        }
        for w in x_shapes.windows(2) {
            if w[0].1 != w[1].0 {
                return Err(CoreError::ShapeMismatch {
                    context: "DnmfProblem::with_shapes",
                    left: format!("{}x{}", w[0].0, w[0].1),
                    right: format!("{}x{}", w[1].0, w[1].1),
                });
            }
        }
        let last = x_shapes[x_shapes.len() - 1];
        if last.1 != y_shape.0 || y_shape.1 != n {
            return Err(CoreError::ShapeMismatch {
                context: "DnmfProblem::with_shapes",
                left: format!("X_k {}x{}", last.0, last.1),
                right: format!("Y {}x{}", y_shape.0, y_shape.1),
            });
        }
        let s_norm_sq = sum_squares(s.as_slice());
        if s_norm_sq == 0.0 {
            return Err(CoreError::DegenerateInput(
                "data matrix S is all zero".into(),
            ));
        }
        let mut blocks = Vec::with_capacity(x_shapes.len() + 2);
        let mut offset = 0;
        for &(r, c) in &x_shapes {
            blocks.push(offset..offset + r * c);
            offset += r * c;
        }
        blocks.push(offset..offset + y_shape.0 * y_shape.1);
        offset += y_shape.0 * y_shape.1;
        blocks.push(offset..offset + m * n);
        offset += m * n;
        Ok(DnmfProblem {
            s,
            x_shapes,
            y_shape,
            l1_weight,
            s_norm_sq,
            blocks,
            dim: offset,
        })
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.s
    }

    pub fn layer_count(&self) -> usize {
        self.x_shapes.len()
    }

    pub fn x_shapes(&self) -> &[(usize, usize)] {
        &self.x_shapes
    }

    pub fn y_shape(&self) -> (usize, usize) {
        self.y_shape
    }

    pub fn l1_weight(&self) -> f64 {
        self.l1_weight
    }

    /// Packs factor matrices into the flat row-major parameter layout.
    pub fn pack(&self, xs: &[DenseMatrix], y: &DenseMatrix, z: &DenseMatrix) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim);
        for x in xs {
            out.extend_from_slice(x.as_slice());
        }
        out.extend_from_slice(y.as_slice());
        out.extend_from_slice(z.as_slice());
        assert_eq!(out.len(), self.dim);
        out
    }

    fn unpack(&self, x: &[f64]) -> Parts {
        assert_eq!(x.len(), self.dim, "parameter vector length");
        let k = self.x_shapes.len();
        let xs = (0..k)
            .map(|i| {
                let (r, c) = self.x_shapes[i];
                DenseMatrix::new(r, c, x[self.blocks[i].clone()].to_vec()).expect("block shape")
            })
            .collect();
        let y = DenseMatrix::new(
            self.y_shape.0,
            self.y_shape.1,
            x[self.blocks[k].clone()].to_vec(),
        )
        .expect("block shape");
        let (m, n) = self.s.shape();
        let z = DenseMatrix::new(m, n, x[self.blocks[k + 1].clone()].to_vec()).expect("block shape");
        Parts { xs, y, z }
    }

    /// Model output `(prod X_i) * relu(Y) + Z` and the activated features.
    fn model(&self, parts: &Parts) -> (DenseMatrix, DenseMatrix) {
        let h = parts.y.relu();
        let a = prefix_products(&parts.xs)
            .pop()
            .expect("at least one layer");
        let recon = a.mat_mul(&h).expect("validated chain");
        (recon.add(&parts.z).expect("same shape"), h)
    }

    /// Penalty-free relative reconstruction error.
    pub fn reconstruction_loss(&self, x: &[f64]) -> f64 {
        let parts = self.unpack(x);
        let (model, _) = self.model(&parts);
        let residual = model.sub(&self.s).expect("same shape");
        sum_squares(residual.as_slice()) / self.s_norm_sq
    }

    /// Exact (sub)gradient of the penalized relaxation. The ReLU and
    /// absolute-value subgradients are 0 at their kinks.
    fn full_gradient(&self, x: &[f64]) -> Vec<f64> {
        let parts = self.unpack(x);
        let k = parts.xs.len();
        let prefixes = prefix_products(&parts.xs);
        let h = parts.y.relu();
        let suffix = suffix_products(&parts.xs, &h);
        let model = suffix[0].add(&parts.z).expect("shape");
        let residual = model.sub(&self.s).expect("shape");
        let g = residual.scale(2.0 / self.s_norm_sq);

        let mut grads: Vec<DenseMatrix> = Vec::with_capacity(k + 2);
        for i in 0..k {
            // d/dX_i = (X_1..X_{i-1})^T * G * (X_{i+1}..X_k * H)^T
            let right = g.mat_mul(&suffix[i + 1].transpose()).expect("shape");
            let grad_x = if i == 0 {
                right
            } else {
                prefixes[i - 1].transpose().mat_mul(&right).expect("shape")
            };
            grads.push(grad_x);
        }
        let grad_h = prefixes[k - 1].transpose().mat_mul(&g).expect("shape");
        let grad_y = grad_h
            .hadamard(&parts.y.map(|v| if v > 0.0 { 1.0 } else { 0.0 }))
            .expect("shape");
        grads.push(grad_y);
        let grad_z = g
            .add(&parts.z.map(|v| self.l1_weight * sign(v)))
            .expect("shape");
        grads.push(grad_z);

        let mut out = Vec::with_capacity(self.dim);
        for gm in &grads {
            out.extend_from_slice(gm.as_slice());
        }
        out
    }

    /// Gradient of the column-`j` component. Components are scaled so their
    /// mean over all columns equals the full gradient.
    fn column_gradient(&self, x: &[f64], j: usize) -> Vec<f64> {
        let parts = self.unpack(x);
        let k = parts.xs.len();
        let (m, n) = self.s.shape();
        assert!(j < n, "component index");
        let prefixes = prefix_products(&parts.xs);
        let h = parts.y.relu();

        // suffix_col[i] = X_{i+1} .. X_k * H[:, j]
        let mut suffix_col: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
        suffix_col[k] = (0..h.rows()).map(|r| h.get(r, j)).collect();
        for i in (0..k).rev() {
            let xi = &parts.xs[i];
            suffix_col[i] = (0..xi.rows())
                .map(|r| {
                    xi.row(r)
                        .iter()
                        .zip(&suffix_col[i + 1])
                        .map(|(&a, &b)| a * b)
                        .sum()
                })
                .collect();
        }

        let scale = 2.0 * n as f64 / self.s_norm_sq;
        let g_col: Vec<f64> = (0..m)
            .map(|r| (suffix_col[0][r] + parts.z.get(r, j) - self.s.get(r, j)) * scale)
            .collect();

        let mut out = vec![0.0; self.dim];
        for i in 0..k {
            // (L_i^T g_col) outer suffix_col[i+1]
            let left: Vec<f64> = if i == 0 {
                g_col.clone()
            } else {
                let l = &prefixes[i - 1];
                (0..l.cols())
                    .map(|c| (0..l.rows()).map(|r| l.get(r, c) * g_col[r]).sum())
                    .collect()
            };
            let (xr, xc) = self.x_shapes[i];
            let dst = &mut out[self.blocks[i].clone()];
            for r in 0..xr {
                for c in 0..xc {
                    dst[r * xc + c] = left[r] * suffix_col[i + 1][c];
                }
            }
        }
        // Y gradient, column j only, gated by the activation.
        let a = &prefixes[k - 1];
        let (yr, yc) = self.y_shape;
        let dst = &mut out[self.blocks[k].clone()];
        for r in 0..yr {
            if parts.y.get(r, j) > 0.0 {
                let val: f64 = (0..a.rows()).map(|q| a.get(q, r) * g_col[q]).sum();
                dst[r * yc + j] = val;
            }
        }
        // Z gradient, column j only.
        let dst = &mut out[self.blocks[k + 1].clone()];
        let l1 = self.l1_weight * n as f64;
        for r in 0..m {
            dst[r * n + j] = g_col[r] + l1 * sign(parts.z.get(r, j));
        }
        out
    }
}

impl Objective for DnmfProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn loss(&self, x: &[f64]) -> f64 {
        let parts = self.unpack(x);
        let (model, _) = self.model(&parts);
        let residual = model.sub(&self.s).expect("same shape");
        sum_squares(residual.as_slice()) / self.s_norm_sq + self.l1_weight * parts.z.l1_norm()
    }

    fn gradient(&self, x: &[f64], _iteration: usize) -> Vec<f64> {
        self.full_gradient(x)
    }

    fn metric(&self, x: &[f64]) -> f64 {
        self.reconstruction_loss(x)
    }

    fn domain(&self) -> DomainBox {
        // Products of k random factors grow multiplicatively; capping the
        // box at 0.5 keeps seeded initial reconstructions near unit loss
        // at every depth used here.
        DomainBox::cube(self.dim, 0.0, 0.5).expect("nonzero dim")
    }

    fn component_count(&self) -> usize {
        self.s.cols()
    }

    fn component_gradient(&self, x: &[f64], component: usize, _iteration: usize) -> Vec<f64> {
        self.column_gradient(x, component)
    }

    fn param_blocks(&self) -> Vec<Range<usize>> {
        self.blocks.clone()
    }

    fn as_dnmf(&self) -> Option<&DnmfProblem> {
        Some(self)
    }
}

/// Seeded synthetic data: `S = A * B + noise * E` with nonnegative uniform
/// factors, so an exact rank-`rank` nonnegative factorization exists at
/// zero noise.
pub fn gen_synthetic_matrix(
    rows: usize,
    cols: usize,
    rank: usize,
    seed: u64,
    noise: f64,
) -> Result<DenseMatrix, CoreError> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(CoreError::Parameter(format!(
            "rank {rank} must be in 1..={} for a {rows}x{cols} matrix",
            rows.min(cols)
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(CoreError::Parameter(format!(
            "noise must be finite and nonnegative, got {noise}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let a = DenseMatrix::random_uniform(rows, rank, &mut rng, 0.0, 1.0);
    let b = DenseMatrix::random_uniform(rank, cols, &mut rng, 0.0, 1.0);
    let mut s = a.mat_mul(&b)?;
    if noise > 0.0 {
        for v in s.as_mut_slice() {
            *v += noise * rng.normal();
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Objective;

    fn scalar_problem() -> DnmfProblem {
        let s = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        DnmfProblem::new(s, 1, 1, 0.01).unwrap()
    }

    #[test]
    fn scalar_reconstruction_loss() {
        // X = 1, Y = 1, Z = 0: (1*relu(1) - 2)^2 / 4 = 0.25
        let p = scalar_problem();
        assert_eq!(p.metric(&[1.0, 1.0, 0.0]), 0.25);
    }

    #[test]
    fn zero_model_gives_unit_loss() {
        let s = gen_synthetic_matrix(6, 5, 2, 3, 0.0).unwrap();
        let p = DnmfProblem::new(s, 2, 2, 0.01).unwrap();
        let x = vec![0.0; p.dim()];
        assert_eq!(p.metric(&x), 1.0);
        assert_eq!(p.loss(&x), 1.0);
    }

    #[test]
    fn exact_factorization_has_zero_loss() {
        let mut rng = SeededRng::new(11);
        let a = DenseMatrix::random_uniform(5, 2, &mut rng, 0.0, 1.0);
        let b = DenseMatrix::random_uniform(2, 4, &mut rng, 0.0, 1.0);
        let s = a.mat_mul(&b).unwrap();
        let p = DnmfProblem::new(s.clone(), 2, 2, 0.01).unwrap();
        // X_1 = A, X_2 = I, Y = B (nonnegative, so relu is the identity), Z = 0.
        let params = p.pack(
            &[a, DenseMatrix::identity(2)],
            &b,
            &DenseMatrix::zeros(5, 4),
        );
        assert_eq!(p.loss(&params), 0.0);
        // At the global minimum of the relaxation every gradient vanishes.
        assert!(p.gradient(&params, 1).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_data_matrix_is_rejected() {
        let s = DenseMatrix::zeros(3, 3);
        assert!(matches!(
            DnmfProblem::new(s, 1, 1, 0.0),
            Err(CoreError::DegenerateInput(_))
        ));
    }

    #[test]
    fn closed_relu_gate_zeroes_y_gradient() {
        let s = DenseMatrix::from_rows(&[vec![2.0]]).unwrap();
        let p = DnmfProblem::new(s, 1, 1, 0.0).unwrap();
        // Y = -1: pre-activation negative, so the Y entry gets no gradient.
        let grad = p.gradient(&[1.0, -1.0, 0.0], 1);
        assert_eq!(grad[1], 0.0);
        assert!(grad[0] == 0.0); // relu(Y) = 0 kills the X path too
        assert!(grad[2] != 0.0); // Z still sees the residual
    }

    #[test]
    fn metric_is_scale_invariant_in_s() {
        // Trivial Z-only parameterization, X = 0, scaled by c = 2.
        let s = gen_synthetic_matrix(4, 3, 2, 9, 0.0).unwrap();
        let p1 = DnmfProblem::new(s.clone(), 1, 2, 0.01).unwrap();
        let p2 = DnmfProblem::new(s.scale(2.0), 1, 2, 0.01).unwrap();
        let mut params = vec![0.0; p1.dim()];
        let z_block = p1.param_blocks()[2].clone();
        let mut rng = SeededRng::new(4);
        for i in z_block.clone() {
            params[i] = rng.next_f64();
        }
        let mut scaled = params.clone();
        for i in z_block {
            scaled[i] *= 2.0;
        }
        assert_eq!(p1.metric(&params).to_bits(), p2.metric(&scaled).to_bits());
    }

    #[test]
    fn column_components_average_to_full_gradient() {
        let s = gen_synthetic_matrix(5, 4, 2, 21, 0.05).unwrap();
        let p = DnmfProblem::new(s, 2, 2, 0.01).unwrap();
        let mut rng = SeededRng::new(2);
        let x: Vec<f64> = (0..p.dim()).map(|_| rng.range_f64(0.05, 1.0)).collect();
        let full = p.gradient(&x, 1);
        let n = p.component_count();
        let mut mean = vec![0.0; p.dim()];
        for j in 0..n {
            for (m, g) in mean.iter_mut().zip(p.component_gradient(&x, j, 1)) {
                *m += g / n as f64;
            }
        }
        for (a, b) in full.iter().zip(&mean) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn stacked_depth_three() {
        let s = gen_synthetic_matrix(16, 16, 3, 5, 0.0).unwrap();
        let p = DnmfProblem::stacked(s, 3, 0.01).unwrap();
        assert_eq!(p.layer_count(), 3);
        // Zero weights: unit loss; seeded random init: finite, in (0, 2].
        assert_eq!(p.metric(&vec![0.0; p.dim()]), 1.0);
        let mut rng = SeededRng::new(17);
        let x = p.initial_point(&mut rng);
        let loss = p.metric(&x);
        assert!(loss.is_finite() && loss > 0.0 && loss <= 2.0, "loss {loss}");
    }

    #[test]
    fn synthetic_generator_is_deterministic() {
        let a = gen_synthetic_matrix(8, 6, 3, 42, 0.01).unwrap();
        let b = gen_synthetic_matrix(8, 6, 3, 42, 0.01).unwrap();
        assert_eq!(a, b);
        assert!(gen_synthetic_matrix(4, 4, 5, 1, 0.0).is_err());
    }
}
