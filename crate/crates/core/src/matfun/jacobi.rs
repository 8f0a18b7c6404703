//! Cyclic Jacobi methods: two-sided for Hermitian eigenproblems, one-sided
//! (Hestenes) for the SVD.
//!
//! Both use the same complex 2x2 rotation. Rotations are applied only when
//! the off-diagonal coupling exceeds `EPS * sqrt(|a_pp a_qq|)`, which gives
//! high relative accuracy for definite and column-scaled inputs.

use alloc::vec;
use alloc::vec::Vec;


use crate::matrix::{ComplexMatrix, C64, ZERO};

const EPS: f64 = f64::EPSILON;
const MAX_SWEEPS: usize = 80;

/// Unitary `G` with `G^* [[a, b], [conj(b), d]] G` diagonal.
///
/// Returned as `[g00, g01, g10, g11]`.
#[inline]
fn rotation(a: f64, d: f64, b: C64) -> [C64; 4] {
    let r = b.norm();
    let phase = b / r;
    let theta = (d - a) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let pc = phase.conj();
    [C64::new(c, 0.0), C64::new(s, 0.0), pc * (-s), pc * c]
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the matching eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = h.n();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let bn = b.norm();
                if bn == 0.0 || bn <= EPS * (app * aqq).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let g = rotation(app, aqq, b);
                // columns: A <- A G
                for i in 0..n {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    a[(i, p)] = x * g[0] + y * g[2];
                    a[(i, q)] = x * g[1] + y * g[3];
                }
                // rows: A <- G^* A
                for j in 0..n {
                    let x = a[(p, j)];
                    let y = a[(q, j)];
                    a[(p, j)] = g[0].conj() * x + g[2].conj() * y;
                    a[(q, j)] = g[1].conj() * x + g[3].conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = x * g[0] + y * g[2];
                    v[(i, q)] = x * g[1] + y * g[3];
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    (values, vectors)
}

/// Thin result of the one-sided Jacobi SVD of a square matrix `a`.
///
/// `a v = w` where the columns of `w` are mutually orthogonal with norms
/// `singular_values` (descending) and `v` is unitary.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
    pub w: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    let n = a.cols();
    let m = a.rows();
    let (cols, vcols, norms) = one_sided(a, true);
    let sigma: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let singular_values = order.iter().map(|&j| sigma[j]).collect();
    let w = ComplexMatrix::from_fn(m, n, |i, j| cols[order[j]][i]);
    let v = ComplexMatrix::from_fn(n, n, |i, j| vcols[order[j]][i]);
    Svd {
        singular_values,
        v,
        w,
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (_, _, norms) = one_sided(a, false);
    let mut sigma: Vec<f64> = norms.iter().map(|x| x.sqrt()).collect();
    sigma.sort_by(|x, y| y.total_cmp(x));
    sigma
}

type Columns = Vec<Vec<C64>>;

/// Hestenes iteration on the columns of `a`; `v` is accumulated only on
/// request.
fn one_sided(a: &ComplexMatrix, with_v: bool) -> (Columns, Columns, Vec<f64>) {
    let n = a.cols();
    // column-major working copies
    let mut cols: Columns = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Columns = if with_v {
        (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = C64::new(1.0, 0.0);
                e
            })
            .collect()
    } else {
        Vec::new()
    };
    let mut norms: Vec<f64> = cols.iter().map(|c| sqr_norm(c)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x.conj() * y).sum();
                let gn = gamma.norm();
                if gn <= EPS * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let g = rotation(alpha, beta, gamma);
                rotate_pair(&mut cols, p, q, &g);
                if with_v {
                    rotate_pair(&mut vcols, p, q, &g);
                }
                norms[p] = sqr_norm(&cols[p]);
                norms[q] = sqr_norm(&cols[q]);
            }
        }
        if !rotated {
            break;
        }
    }
    (cols, vcols, norms)
}

#[inline]
fn sqr_norm(c: &[C64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}

#[inline]
fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, g: &[C64; 4]) {
    let (lo, hi) = cols.split_at_mut(q);
    let cp = &mut lo[p];
    let cq = &mut hi[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a * g[0] + b * g[2];
        *y = a * g[1] + b * g[3];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: u64) -> ComplexMatrix {
        // small deterministic LCG, enough for kernel tests
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn eigen_reconstructs_hermitian_input() {
        for seed in 0..20 {
            let g = sample(7, seed);
            let h = g.hermitian_part();
            let (lam, v) = hermitian_eigen(&h);
            assert!(lam.windows(2).all(|w| w[0] <= w[1]));
            let d = ComplexMatrix::from_real_diag(&lam);
            let rec = v.matmul(&d).mul_adjoint(&v);
            assert!(rec.distance(&h) <= 1e-12 * (1.0 + h.frobenius_norm()));
            assert!(v.unitarity_defect() <= 1e-12);
        }
    }

    #[test]
    fn svd_columns_are_orthogonal_and_reconstruct() {
        for seed in 0..20 {
            let a = sample(6, 100 + seed);
            let s = svd(&a);
            assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert!(a.matmul(&s.v).distance(&s.w) < 1e-12);
            assert!(s.v.unitarity_defect() < 1e-12);
            let gram = s.w.adjoint_mul(&s.w);
            for i in 0..6 {
                for j in 0..6 {
                    if i != j {
                        assert!(gram[(i, j)].norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn svd_of_nilpotent_unit() {
        let a = ComplexMatrix::unit(2, 0, 1).scale_real(2.0);
        let s = svd(&a);
        assert_eq!(s.singular_values, vec![2.0, 0.0]);
    }
}
