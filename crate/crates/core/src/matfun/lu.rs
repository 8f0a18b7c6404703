//! LU factorization with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;


use super::MatError;
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    /// Factors a square matrix. Exactly zero pivots are reported as
    /// [`MatError::Singular`].
    pub fn new(a: &ComplexMatrix) -> Result<Self, MatError> {
        if !a.is_square() {
            return Err(MatError::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        let n = a.n();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 {
                return Err(MatError::Singular);
            }
            if piv != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(piv, j)];
                    lu[(piv, j)] = t;
                }
                perm.swap(k, piv);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm, sign })
    }

    pub fn determinant(&self) -> C64 {
        let n = self.lu.n();
        (0..n).map(|i| self.lu[(i, i)]).product::<C64>() * self.sign
    }

    /// `sum_i log |u_ii|`, i.e. `log |det a|` without over/underflow.
    pub fn log_abs_det(&self) -> f64 {
        let n = self.lu.n();
        (0..n).map(|i| self.lu[(i, i)].norm().ln()).sum()
    }

    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.n();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> ComplexMatrix {
        let n = self.lu.n();
        let mut inv = ComplexMatrix::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.fill(ZERO);
            e[j] = ONE;
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, MatError> {
    Ok(Lu::new(a)?.inverse())
}
