//! Dense complex matrix functions: Hermitian spectral calculus, polar
//! decomposition with unitary completion, UL factorization and trace-inner-
//! product projections.

mod jacobi;
mod lu;
mod project;
mod qr;
mod ul;

use alloc::vec::Vec;


pub use jacobi::{hermitian_eigen, singular_values, svd, Svd};
pub use lu::{inverse, Lu};
pub use project::{complete_orthonormal, orth_project, orthonormalize, project_onto_orthonormal, Projection};
pub use qr::{least_squares_residual_sqr, HouseholderQr};
pub use ul::ul_factor;

use crate::matrix::{ComplexMatrix, C64};

/// Default split between numerical range and null space, relative to the
/// largest singular value.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Hermiticity tolerance for spectral-calculus inputs, relative to
/// `1 + |H|_F`.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatError {
    #[error("input is not Hermitian (|H - H^*|_F = {defect:e})")]
    NonHermitianInput { defect: f64 },
    #[error("function needs a positive spectrum, smallest eigenvalue is {min:e}")]
    NonPositiveSpectrum { min: f64 },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("block structure covers {blocks} rows but the matrix has {n}")]
    BlockMismatch { n: usize, blocks: usize },
}

/// Scalar function applied through the Hermitian functional calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatFn {
    Log,
    Exp,
    Sqrt,
    Pow(f64),
}

impl MatFn {
    fn needs_definite(self) -> bool {
        match self {
            MatFn::Log => true,
            MatFn::Pow(t) => t < 0.0,
            MatFn::Exp | MatFn::Sqrt => false,
        }
    }

    fn needs_semidefinite(self) -> bool {
        match self {
            MatFn::Sqrt => true,
            MatFn::Pow(t) => t > 0.0 && t.fract() != 0.0,
            _ => false,
        }
    }

    fn eval(self, x: f64) -> f64 {
        match self {
            MatFn::Log => x.ln(),
            MatFn::Exp => x.exp(),
            MatFn::Sqrt => x.sqrt(),
            MatFn::Pow(t) => x.powf(t),
        }
    }
}

/// Spectral resolution `H = V diag(eigenvalues) V^*`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn new(h: &ComplexMatrix) -> Result<Self, MatError> {
        check_hermitian(h)?;
        let (eigenvalues, eigenvectors) = hermitian_eigen(h);
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V diag(values) V^*`, symmetrized.
    pub fn reassemble(&self, values: &[f64]) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * values[j]);
        scaled.mul_adjoint(v).hermitian_part()
    }

    /// Applies `f` to the spectrum, enforcing the positivity `f` needs.
    pub fn apply(&self, f: MatFn) -> Result<ComplexMatrix, MatError> {
        let min = self.min();
        if f.needs_definite() && min <= 0.0 {
            return Err(MatError::NonPositiveSpectrum { min });
        }
        let floor = -HERMITIAN_TOL * (1.0 + self.max().abs());
        if f.needs_semidefinite() && min < floor {
            return Err(MatError::NonPositiveSpectrum { min });
        }
        let values: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&x| {
                let x = if f.needs_semidefinite() { x.max(0.0) } else { x };
                f.eval(x)
            })
            .collect();
        Ok(self.reassemble(&values))
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<(), MatError> {
    if !h.is_square() {
        return Err(MatError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL * (1.0 + h.frobenius_norm()) {
        return Err(MatError::NonHermitianInput { defect });
    }
    Ok(())
}

/// `V diag(f(lambda)) V^*` for Hermitian `h`.
///
/// `Log` and negative powers need a positive definite input; `Sqrt` and
/// fractional positive powers accept semidefinite input, with eigenvalues
/// that are negative only by roundoff clamped to zero.
pub fn herm_apply(h: &ComplexMatrix, f: MatFn) -> Result<ComplexMatrix, MatError> {
    HermitianSpectrum::new(h)?.apply(f)
}

/// `|a| = (a^* a)^{1/2}`, assembled from the SVD so that its eigenvalues are
/// the singular values of `a`.
pub fn abs_op(a: &ComplexMatrix) -> ComplexMatrix {
    let s = svd(a);
    spectral_from_svd(&s.v, &s.singular_values)
}

fn spectral_from_svd(v: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = v.rows();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * values[j]);
    scaled.mul_adjoint(v).hermitian_part()
}

/// Polar decomposition `a = unitary * modulus` with a full unitary.
#[derive(Debug, Clone)]
pub struct PolarParts {
    pub unitary: ComplexMatrix,
    pub modulus: ComplexMatrix,
    pub numerical_rank: usize,
}

/// Polar decomposition whose partial isometry is completed to a unitary.
///
/// Singular values above `rank_tol * sigma_max` span the numerical range;
/// the remaining left and right singular directions are replaced by
/// canonical orthonormal completions of the range and co-range and paired
/// in order. `modulus` is the exact `|a|` and is not thresholded.
pub fn polar_unitary(a: &ComplexMatrix, rank_tol: f64) -> PolarParts {
    assert!(a.is_square(), "polar decomposition needs a square matrix");
    assert!(rank_tol > 0.0 && rank_tol < 1.0, "rank_tol must lie in (0, 1)");
    let n = a.n();
    let s = svd(a);
    let sigma_max = s.singular_values.first().copied().unwrap_or(0.0);
    let rank = s
        .singular_values
        .iter()
        .take_while(|&&x| sigma_max > 0.0 && x > rank_tol * sigma_max)
        .count();

    let left: Vec<Vec<C64>> = (0..rank)
        .map(|j| {
            let inv = 1.0 / s.singular_values[j];
            s.w.column(j).into_iter().map(|z| z * inv).collect()
        })
        .collect();
    let right: Vec<Vec<C64>> = (0..rank).map(|j| s.v.column(j)).collect();
    let left_null = complete_orthonormal(&left, n);
    let right_null = complete_orthonormal(&right, n);

    let mut unitary = ComplexMatrix::zeros(n, n);
    for (u, v) in left.iter().chain(&left_null).zip(right.iter().chain(&right_null)) {
        for i in 0..n {
            for j in 0..n {
                unitary[(i, j)] += u[i] * v[j].conj();
            }
        }
    }
    PolarParts {
        unitary,
        modulus: spectral_from_svd(&s.v, &s.singular_values),
        numerical_rank: rank,
    }
}
