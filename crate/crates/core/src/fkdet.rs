//! Fuglede-Kadison determinant `Delta(a) = exp tau(log |a|)` on `M_n` with
//! normalized trace, i.e. the geometric mean of the singular values.

use alloc::vec::Vec;

use crate::matfun::{self, singular_values};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DetReport {
    pub value: f64,
    /// `(1/n) sum log sigma_i`, `-inf` when some `sigma_i` is zero.
    pub log_value: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
}

/// `Delta(a)`, or `exp tau(log(|a| + eps))` when `epsilon` is given.
///
/// No singular value is thresholded: an exactly zero one gives `0`, a tiny
/// one gives a tiny determinant.
pub fn fk_det(a: &ComplexMatrix, epsilon: Option<f64>) -> DetReport {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let singular_values = singular_values(a);
    let log_value = log_det_of(&singular_values, epsilon.unwrap_or(0.0));
    DetReport {
        value: log_value.exp(),
        log_value,
        singular_values,
    }
}

/// `(1/n) sum log(sigma_i + eps)`, summed term by term.
pub fn log_det_of(singular_values: &[f64], epsilon: f64) -> f64 {
    assert!(epsilon >= 0.0, "epsilon must be nonnegative");
    if singular_values.is_empty() {
        return 0.0;
    }
    let mut s = 0.0;
    for &x in singular_values {
        let t = x + epsilon;
        if t == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += t.ln();
    }
    s / singular_values.len() as f64
}

/// Shorthand for `fk_det(a, None).value`.
pub fn delta(a: &ComplexMatrix) -> f64 {
    fk_det(a, None).value
}

/// `log |a| = V diag(log sigma) V^*`, for invertible `a`.
pub fn log_abs(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let s = matfun::svd(a);
    if s.singular_values.contains(&0.0) {
        return None;
    }
    let logs: Vec<f64> = s.singular_values.iter().map(|x| x.ln()).collect();
    let n = a.n();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| s.v[(i, j)] * logs[j]);
    Some(scaled.mul_adjoint(&s.v).hermitian_part())
}

/// `|x - y| / max(|x|, |y|)`, zero when both vanish.
pub fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::C64;

    #[test]
    fn identity_and_diagonal() {
        assert_eq!(delta(&ComplexMatrix::identity(5)), 1.0);
        assert!((delta(&ComplexMatrix::from_real_diag(&[1.0, 4.0])) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn singular_input_has_zero_determinant() {
        let r = fk_det(&ComplexMatrix::unit(2, 0, 1), None);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.log_value, f64::NEG_INFINITY);
        // regularized value is positive: sqrt((0 + e)(1 + e))
        let e = 0.25;
        let r = fk_det(&ComplexMatrix::unit(2, 0, 1), Some(e));
        assert!((r.value - (e * (1.0 + e)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn epsilon_is_monotone() {
        let a = ComplexMatrix::from_rows(&[
            alloc::vec![C64::new(1.0, 1.0), C64::new(0.3, 0.0)],
            alloc::vec![C64::new(0.0, -2.0), C64::new(0.5, 0.5)],
        ])
        .unwrap();
        let d0 = delta(&a);
        let d1 = fk_det(&a, Some(1e-3)).value;
        let d2 = fk_det(&a, Some(1e-1)).value;
        assert!(d2 >= d1 && d1 >= d0);
    }

    #[test]
    fn unitary_phase_has_unit_determinant() {
        let a = ComplexMatrix::from_diag(&[C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]);
        assert!((delta(&a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_abs_of_diagonal() {
        let a = ComplexMatrix::from_real_diag(&[-2.0, 0.5]);
        let l = log_abs(&a).unwrap();
        let expected = ComplexMatrix::from_real_diag(&[2f64.ln(), 0.5f64.ln()]);
        assert!(l.distance(&expected) < 1e-15);
        assert!(log_abs(&ComplexMatrix::unit(2, 0, 1)).is_none());
    }
}
