//! Least-squares projection in the trace inner product, and orthonormal
//! completion of column sets.

use alloc::vec;
use alloc::vec::Vec;


use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Basis elements whose component orthogonal to the earlier ones is below
/// this fraction of their own norm are treated as dependent.
const DEPENDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Projection {
    pub projection: ComplexMatrix,
    pub residual: ComplexMatrix,
    /// Dimension of the span actually used.
    pub rank: usize,
}

/// Orthonormal basis (in `<y, z> = tau(z^* y)`) of `span(basis)`, by
/// modified Gram-Schmidt with one reorthogonalization pass. Dependent
/// elements are dropped.
pub fn orthonormalize(basis: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = Vec::with_capacity(basis.len());
    for b in basis {
        let norm0 = b.inner(b).re.sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut r = b.clone();
        for _ in 0..2 {
            for q in &out {
                let c = r.inner(q);
                r.axpy(-c, q);
            }
        }
        let norm = r.inner(&r).re.sqrt();
        if norm <= DEPENDENCE_TOL * norm0 {
            continue;
        }
        out.push(r.scale_real(1.0 / norm));
    }
    out
}

/// Orthogonal projection of `x` onto `span(basis)` in the trace inner
/// product. An empty basis projects to zero.
pub fn orth_project(x: &ComplexMatrix, basis: &[ComplexMatrix]) -> Projection {
    let q = orthonormalize(basis);
    project_onto_orthonormal(x, &q)
}

pub fn project_onto_orthonormal(x: &ComplexMatrix, q: &[ComplexMatrix]) -> Projection {
    let mut residual = x.clone();
    // two passes keep the residual orthogonal to working precision
    for _ in 0..2 {
        for e in q {
            let c = residual.inner(e);
            residual.axpy(-c, e);
        }
    }
    let projection = x.sub_ref(&residual);
    Projection {
        projection,
        residual,
        rank: q.len(),
    }
}

/// Completes orthonormal columns `cols` (each of length `n`) to an
/// orthonormal basis of `C^n`. Returns only the new vectors.
///
/// Greedy and deterministic: at each step the standard basis vector with
/// the largest component outside the current span is adopted, ties going to
/// the lowest index.
pub fn complete_orthonormal(cols: &[Vec<C64>], n: usize) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = cols.to_vec();
    let mut added = Vec::with_capacity(n.saturating_sub(cols.len()));
    let mut used = vec![false; n];
    while basis.len() < n {
        let mut best: Option<(usize, Vec<C64>, f64)> = None;
        for (k, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut r = vec![ZERO; n];
            r[k] = ONE;
            for _ in 0..2 {
                for q in &basis {
                    let c: C64 = q.iter().zip(&r).map(|(qi, ri)| qi.conj() * ri).sum();
                    for (ri, qi) in r.iter_mut().zip(q) {
                        *ri -= c * qi;
                    }
                }
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|b| norm > b.2) {
                best = Some((k, r, norm));
            }
        }
        let (k, mut r, norm) = best.expect("fewer than n vectors in C^n");
        used[k] = true;
        for z in r.iter_mut() {
            *z /= norm;
        }
        basis.push(r.clone());
        added.push(r);
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projects_onto_single_element() {
        let x = ComplexMatrix::from_real(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let s = ComplexMatrix::from_real(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let p = orth_project(&x, &[s]);
        let expected = ComplexMatrix::from_real(&[&[0.0, 0.5], &[0.0, 0.5]]);
        assert!(p.projection.distance(&expected) < 1e-15);
    }

    #[test]
    fn empty_basis_projects_to_zero() {
        let x = ComplexMatrix::from_real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let p = orth_project(&x, &[]);
        assert_eq!(p.projection, ComplexMatrix::zeros(2, 2));
        assert_eq!(p.residual, x);
        assert_eq!(p.rank, 0);
    }

    #[test]
    fn self_projection_leaves_no_residual() {
        let s = ComplexMatrix::from_real(&[&[0.0, 1.0], &[2.0, 1.0]]);
        let p = orth_project(&s, core::slice::from_ref(&s));
        assert!(p.projection.distance(&s) < 1e-15);
        assert!(p.residual.frobenius_norm() < 1e-15);
    }

    #[test]
    fn dependent_basis_is_reduced() {
        let a = ComplexMatrix::unit(2, 0, 1);
        let b = a.scale_real(3.0);
        let c = ComplexMatrix::unit(2, 1, 0);
        let q = orthonormalize(&[a, b, c]);
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn completion_fills_missing_directions() {
        let s = 1.0 / 2f64.sqrt();
        let cols = vec![vec![C64::new(s, 0.0), C64::new(0.0, s), ZERO]];
        let extra = complete_orthonormal(&cols, 3);
        assert_eq!(extra.len(), 2);
        let all: Vec<&Vec<C64>> = cols.iter().chain(extra.iter()).collect();
        for i in 0..3 {
            for j in 0..3 {
                let ip: C64 = all[i].iter().zip(all[j]).map(|(a, b)| a.conj() * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(target, 0.0)).norm() < 1e-14);
            }
        }
    }
}
