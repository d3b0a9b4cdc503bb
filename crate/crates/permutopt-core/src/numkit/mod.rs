//! Minimal dense linear algebra and deterministic randomness.

mod matrix;
mod rng;
mod vec_ops;

pub use matrix::DenseMatrix;
pub use rng::{mix_seed, SeededRng};
pub use vec_ops::{l1_norm, l2_distance, l2_norm, sum_squares};
