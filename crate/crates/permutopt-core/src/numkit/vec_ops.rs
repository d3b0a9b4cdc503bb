//! Norms and distances on flat `f64` slices.

use alloc::vec::Vec;

/// Sum of squared entries, accumulated in a canonical order.
///
/// The squared terms are summed after sorting, so any permutation of the
/// input yields the bit-identical result.
pub fn sum_squares(v: &[f64]) -> f64 {
    let mut sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    sq.sort_unstable_by(f64::total_cmp);
    sq.iter().sum()
}

/// Euclidean norm. Inherits [`sum_squares`]'s order invariance: reordering
/// a vector never changes its reported norm, not even in the last ulp.
pub fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(sum_squares(v))
}

/// Euclidean distance between two equal-length slices.
///
/// Shares [`l2_norm`]'s order invariance: applying the same permutation to
/// both arguments yields the bit-identical distance.
pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    sq.sort_unstable_by(f64::total_cmp);
    libm::sqrt(sq.iter().sum())
}

/// Sum of absolute values.
pub fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| libm::fabs(*x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_of_three_four() {
        assert_eq!(l2_norm(&[3.0, 4.0]), 5.0);
    }

    #[test]
    fn norm_is_order_invariant_bitwise() {
        let v = [0.1, 0.7, -3.3, 2.0, 1e-9];
        let w = [1e-9, 2.0, 0.1, -3.3, 0.7];
        assert_eq!(l2_norm(&v).to_bits(), l2_norm(&w).to_bits());
    }

    #[test]
    fn distance_of_identical_vectors_is_zero() {
        let v = [1.0, -2.0, 3.5];
        assert_eq!(l2_distance(&v, &v), 0.0);
    }

    #[test]
    fn l1_norm_sums_magnitudes() {
        assert_eq!(l1_norm(&[1.0, -2.0, 0.5]), 3.5);
    }
}
