//! Reverse (UL) block Cholesky factorization.

use super::{herm_apply, MatError, MatFn};
use crate::algebra::BlockStructure;
use crate::matrix::ComplexMatrix;

/// Block upper-triangular `a` with `a a^* = m` and Hermitian positive
/// definite diagonal blocks.
///
/// Works from the last block upward: `A_jj = S_jj^{1/2}`, the blocks above
/// it are `M_ij A_jj^{-1}`, and the leading part is replaced by its Schur
/// complement. Entries below the block diagonal are never written, so they
/// are exact zeros.
pub fn ul_factor(m: &ComplexMatrix, blocks: &BlockStructure) -> Result<ComplexMatrix, MatError> {
    if !m.is_square() {
        return Err(MatError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.n();
    if blocks.n() != n {
        return Err(MatError::BlockMismatch {
            n,
            blocks: blocks.n(),
        });
    }
    let scale = 1.0 + m.frobenius_norm();
    if m.hermitian_defect() > 1e-12 * scale {
        return Err(MatError::NotPositiveDefinite);
    }

    let mut work = m.hermitian_part();
    let mut a = ComplexMatrix::zeros(n, n);
    for b in (0..blocks.len()).rev() {
        let off = blocks.offset(b);
        let size = blocks.sizes()[b];
        let s = work.submatrix(off, size, off, size);
        let root = herm_apply(&s, MatFn::Sqrt).map_err(positivity)?;
        let inv_root = herm_apply(&s, MatFn::Pow(-0.5)).map_err(positivity)?;
        a.set_submatrix(off, off, &root);
        if off == 0 {
            break;
        }
        let upper = work.submatrix(0, off, off, size);
        let coupling = upper.matmul(&inv_root);
        a.set_submatrix(0, off, &coupling);
        let lead = work.submatrix(0, off, 0, off);
        let schur = lead.sub_ref(&coupling.mul_adjoint(&coupling)).hermitian_part();
        work.set_submatrix(0, 0, &schur);
    }
    Ok(a)
}

fn positivity(e: MatError) -> MatError {
    match e {
        MatError::NonPositiveSpectrum { .. } | MatError::NonHermitianInput { .. } => {
            MatError::NotPositiveDefinite
        }
        other => other,
    }
}
