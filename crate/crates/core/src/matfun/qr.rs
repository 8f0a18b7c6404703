//! Householder QR for (possibly tall) complex matrices.

use alloc::vec::Vec;


use crate::matrix::{ComplexMatrix, C64, ZERO};

/// Packed Householder factorization `a = Q R` of an `m x n` matrix, `m >= n`.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    /// Unit reflector vectors; reflector `k` acts on rows `k..m`.
    reflectors: Vec<Option<Vec<C64>>>,
    r: ComplexMatrix,
}

impl HouseholderQr {
    pub fn new(a: &ComplexMatrix) -> Self {
        let (m, n) = (a.rows(), a.cols());
        assert!(m >= n, "QR needs rows >= cols");
        let mut r = a.clone();
        let mut reflectors = Vec::with_capacity(n);
        for k in 0..n {
            let x: Vec<C64> = (k..m).map(|i| r[(i, k)]).collect();
            let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if xnorm == 0.0 {
                reflectors.push(None);
                continue;
            }
            let phase = if x[0].norm() == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                x[0] / x[0].norm()
            };
            let alpha = -phase * xnorm;
            let mut v = x;
            v[0] -= alpha;
            let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                reflectors.push(None);
                continue;
            }
            for z in v.iter_mut() {
                *z /= vnorm;
            }
            apply_reflector(&mut r, k, &v, k);
            for i in k + 1..m {
                r[(i, k)] = ZERO;
            }
            r[(k, k)] = alpha;
            reflectors.push(Some(v));
        }
        Self { reflectors, r }
    }

    /// Upper-triangular factor (`n x n` leading block for tall input).
    pub fn r(&self) -> ComplexMatrix {
        let n = self.r.cols();
        self.r.submatrix(0, n, 0, n)
    }

    /// Full `m x m` unitary factor.
    pub fn q(&self) -> ComplexMatrix {
        let m = self.r.rows();
        let mut q = ComplexMatrix::identity(m);
        for (k, refl) in self.reflectors.iter().enumerate().rev() {
            if let Some(v) = refl {
                apply_reflector(&mut q, k, v, 0);
            }
        }
        q
    }

    /// `Q^* b` for a vector `b` of length `m`.
    pub fn apply_q_adjoint(&self, b: &[C64]) -> Vec<C64> {
        let mut y = b.to_vec();
        for (k, refl) in self.reflectors.iter().enumerate() {
            if let Some(v) = refl {
                let s: C64 = v.iter().zip(&y[k..]).map(|(vi, yi)| vi.conj() * yi).sum();
                for (yi, vi) in y[k..].iter_mut().zip(v) {
                    *yi -= *vi * s * 2.0;
                }
            }
        }
        y
    }
}

/// `a[k.., c0..] <- (I - 2 v v^*) a[k.., c0..]`
fn apply_reflector(a: &mut ComplexMatrix, k: usize, v: &[C64], c0: usize) {
    let m = a.rows();
    for j in c0..a.cols() {
        let s: C64 = (k..m).map(|i| v[i - k].conj() * a[(i, j)]).sum();
        if s == ZERO {
            continue;
        }
        for i in k..m {
            let vi = v[i - k];
            a[(i, j)] -= vi * s * 2.0;
        }
    }
}

/// Squared residual norm `min_x |b - a x|^2` for tall `a`, computed from the
/// tail of `Q^* b`.
pub fn least_squares_residual_sqr(a: &ComplexMatrix, b: &[C64]) -> f64 {
    let qr = HouseholderQr::new(a);
    let y = qr.apply_q_adjoint(b);
    y[a.cols()..].iter().map(|z| z.norm_sqr()).sum()
}
