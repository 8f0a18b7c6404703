//! Inner-outer theory in the block model: the projection of `k` onto
//! `span(k A_0)`, Beurling-Nevanlinna factorization `k = u h`, a Householder
//! oracle for it, outer tests, and the Riesz-type factorizations built on
//! top.

use alloc::vec::Vec;

use crate::algebra::{AlgebraError, Part, SubdiagonalContext, MEMBERSHIP_TOL};
use crate::fkdet::{delta, fk_det};
use crate::matfun::{
    herm_apply, orth_project, polar_unitary, HouseholderQr, Lu, MatError, MatFn, DEFAULT_RANK_TOL,
};
use crate::matrix::ComplexMatrix;

/// Default relative threshold for `Delta > 0`, against `sigma_max`.
pub const DEFAULT_DET_TOL: f64 = 1e-10;

/// Relative distance from `A` above which a computed outer factor is
/// treated as a numerical breakdown.
pub const FACTOR_MEMBERSHIP_TOL: f64 = 1e-8;

/// Membership tolerance for `h^{-1}` in the inverse-based outer test.
pub const INVERSE_MEMBERSHIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FactorizeError {
    #[error("determinant {det:e} is not positive at tolerance {tol:e}")]
    DeterminantZero { det: f64, tol: f64 },
    #[error("outer factor is {distance:e} away from A")]
    MembershipFailure { distance: f64 },
    #[error("matrix is rank deficient")]
    RankDeficient,
    #[error("element is not in A (distance {distance:e})")]
    NotInA { distance: f64 },
    #[error("input is not outer")]
    NotOuter,
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `k = u h`.
    Right,
    /// `k = h u`.
    Left,
}

#[derive(Debug, Clone)]
pub struct ProjectionDiagnostics {
    /// Frobenius norm of the off-block-diagonal part of `|k - v|^2`.
    pub off_block_mass: f64,
    /// `Delta(|k - v|) - Delta(k)`.
    pub det_excess: f64,
}

/// `v` = orthogonal projection of `k` onto `span { k E : E in A_0 }`.
pub fn project_onto_ka0(
    ctx: &SubdiagonalContext,
    k: &ComplexMatrix,
) -> Result<(ComplexMatrix, ProjectionDiagnostics), FactorizeError> {
    ctx.check_shape(k)?;
    let basis: Vec<ComplexMatrix> = ctx.a0_basis().iter().map(|e| k.matmul(e)).collect();
    let proj = orth_project(k, &basis);
    let r = proj.residual;
    let gram = r.adjoint_mul(&r);
    let off_block_mass = ctx.membership_distance(&gram, Part::D)?;
    let det_excess = delta(&r) - delta(k);
    Ok((
        proj.projection,
        ProjectionDiagnostics {
            off_block_mass,
            det_excess,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct FactorizationResult {
    pub side: Side,
    pub u: ComplexMatrix,
    pub h: ComplexMatrix,
    pub v: ComplexMatrix,
    /// `|u h - k|_F` (right) or `|h u - k|_F` (left).
    pub residual_reconstruction: f64,
    /// Distance of the computed `h` to `A` before it was projected there.
    pub residual_membership: f64,
    /// `(Delta(h), Delta(Phi(h)))`.
    pub outer_certificate: (f64, f64),
    /// Threshold used for `Delta(k) > 0`.
    pub det_tol: f64,
}

/// `k = u h` with `u` unitary and `h` outer in `A` (or `k = h u` on the
/// left).
///
/// Right side: `v` projects `k` onto `span(k A_0)`, `u` is the unitary polar
/// part of `k - v` and `h = u^* k`. Then `Phi(h) = |k - v|`, so `h` comes
/// out with positive definite diagonal blocks. The left side factors `k^*`
/// over `A^*` and takes adjoints.
pub fn beurling_nevanlinna(
    ctx: &SubdiagonalContext,
    k: &ComplexMatrix,
    side: Side,
    tol: f64,
) -> Result<FactorizationResult, FactorizeError> {
    ctx.check_shape(k)?;
    let r = fk_det(k, None);
    let smax = r.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 || r.value <= tol * smax {
        return Err(FactorizeError::DeterminantZero {
            det: r.value,
            tol: tol * smax,
        });
    }
    match side {
        Side::Right => right_factor(ctx, k, tol),
        Side::Left => {
            let f = right_factor(&ctx.adjoint(), &k.adjoint(), tol)?;
            let u = f.u.adjoint();
            let h = f.h.adjoint();
            Ok(FactorizationResult {
                side: Side::Left,
                residual_reconstruction: h.matmul(&u).distance(k),
                u,
                h,
                v: f.v.adjoint(),
                ..f
            })
        }
    }
}

fn right_factor(
    ctx: &SubdiagonalContext,
    k: &ComplexMatrix,
    tol: f64,
) -> Result<FactorizationResult, FactorizeError> {
    let (v, _) = project_onto_ka0(ctx, k)?;
    let u = polar_unitary(&k.sub_ref(&v), DEFAULT_RANK_TOL).unitary;
    let raw = u.adjoint_mul(k);
    let residual_membership = ctx.membership_distance(&raw, Part::A)?;
    if residual_membership > FACTOR_MEMBERSHIP_TOL * (1.0 + k.frobenius_norm()) {
        return Err(FactorizeError::MembershipFailure {
            distance: residual_membership,
        });
    }
    let h = ctx.project(&raw, Part::A)?;
    let outer_certificate = (delta(&h), delta(&ctx.phi(&h)?));
    Ok(FactorizationResult {
        side: Side::Right,
        residual_reconstruction: u.matmul(&h).distance(k),
        u,
        h,
        v,
        residual_membership,
        outer_certificate,
        det_tol: tol,
    })
}

/// `f = q r`, `q` unitary, `r` block upper triangular with positive definite
/// diagonal blocks, from Householder QR followed by a polar gauge fix of
/// each diagonal block.
pub fn qr_oracle(
    ctx: &SubdiagonalContext,
    f: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix), FactorizeError> {
    ctx.check_shape(f)?;
    let qr = HouseholderQr::new(f);
    let (q, r) = (qr.q(), qr.r());
    let n = f.n();
    let diag_max = (0..n).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..n).any(|i| r[(i, i)].norm() <= 1e-14 * diag_max) || diag_max == 0.0 {
        return Err(FactorizeError::RankDeficient);
    }
    let blocks = ctx.blocks();
    let mut gauge = ComplexMatrix::zeros(n, n);
    for b in 0..blocks.len() {
        let off = blocks.offset(b);
        let s = blocks.sizes()[b];
        let w = polar_unitary(&r.submatrix(off, s, off, s), DEFAULT_RANK_TOL).unitary;
        gauge.set_submatrix(off, off, &w);
    }
    let r = ctx.project(&gauge.adjoint_mul(&r), Part::A)?;
    Ok((q.matmul(&gauge), r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterVerdict {
    pub by_determinant: bool,
    pub by_inverse: bool,
    pub agree: bool,
    pub det: f64,
    pub det_phi: f64,
}

/// Two independent outer tests for `h in A`.
///
/// `by_determinant`: `Delta(h) > tol * sigma_max` and
/// `|Delta(h) - Delta(Phi(h))| <= tol * Delta(h)`. `by_inverse`:
/// `sigma_min > tol * sigma_max` and `h^{-1}` lies in `A`, the
/// finite-dimensional form of `1 in [hA]`.
pub fn is_outer(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<OuterVerdict, FactorizeError> {
    ctx.check_shape(h)?;
    let distance = ctx.membership_distance(h, Part::A)?;
    if distance > MEMBERSHIP_TOL * h.frobenius_norm() {
        return Err(FactorizeError::NotInA { distance });
    }
    let r = fk_det(h, None);
    let det = r.value;
    let det_phi = delta(&ctx.phi(h)?);
    let smax = r.singular_values.first().copied().unwrap_or(0.0);
    let smin = r.singular_values.last().copied().unwrap_or(0.0);
    let by_determinant = smax > 0.0 && det > tol * smax && (det - det_phi).abs() <= tol * det;
    let by_inverse = smax > 0.0
        && smin > tol * smax
        && match Lu::new(h) {
            Ok(lu) => {
                let inv = lu.inverse();
                ctx.membership_distance(&inv, Part::A)? <= INVERSE_MEMBERSHIP_TOL * inv.frobenius_norm()
            }
            Err(_) => false,
        };
    Ok(OuterVerdict {
        by_determinant,
        by_inverse,
        agree: by_determinant == by_inverse,
        det,
        det_phi,
    })
}

/// Outer `h` with `|h|^p = f`: factor `f^{1/p} = u h` and keep `h`.
pub fn riesz_szego_lift(
    ctx: &SubdiagonalContext,
    f: &ComplexMatrix,
    p: f64,
) -> Result<ComplexMatrix, FactorizeError> {
    assert!(p >= 1.0, "exponent must be at least 1");
    ctx.check_shape(f)?;
    let g = herm_apply(f, MatFn::Pow(1.0 / p))?;
    Ok(beurling_nevanlinna(ctx, &g, Side::Right, DEFAULT_DET_TOL)?.h)
}

#[derive(Debug, Clone)]
pub struct RieszRefinement {
    pub h1: ComplexMatrix,
    pub d: ComplexMatrix,
    pub h2: ComplexMatrix,
    /// `|(f - h1) d h2 - f|_F`.
    pub residual: f64,
}

/// `f = (f - h1) d h2` with `h2` outer and `d in D`,
/// `Delta(d) = Delta(f)^{-1/2}`.
///
/// With `f = w |f|`, `k = |f|^{1/2}`, `v` the projection of `k` onto
/// `span(k A_0)` and `u` the unitary part of `k - v`: `h2 = u^* k`,
/// `d = |k - v|^{-1}` and `h1 = w k v`.
pub fn riesz_refinement(
    ctx: &SubdiagonalContext,
    f: &ComplexMatrix,
) -> Result<RieszRefinement, FactorizeError> {
    ctx.check_shape(f)?;
    let r = fk_det(f, None);
    let smax = r.singular_values.first().copied().unwrap_or(0.0);
    if smax == 0.0 || r.value <= DEFAULT_DET_TOL * smax {
        return Err(FactorizeError::DeterminantZero {
            det: r.value,
            tol: DEFAULT_DET_TOL * smax,
        });
    }
    let polar = polar_unitary(f, DEFAULT_RANK_TOL);
    let k = herm_apply(&polar.modulus, MatFn::Sqrt)?;
    let (v, _) = project_onto_ka0(ctx, &k)?;
    let kv = k.sub_ref(&v);
    let pk = polar_unitary(&kv, DEFAULT_RANK_TOL);
    // |k - v| lies in D; pinch away roundoff before inverting
    let modulus = ctx.phi(&pk.modulus)?.hermitian_part();
    let d = herm_apply(&modulus, MatFn::Pow(-1.0))?;
    let h2 = pk.unitary.adjoint_mul(&k);
    let h1 = polar.unitary.matmul(&k).matmul(&v);
    let residual = f.sub_ref(&h1).matmul(&d).matmul(&h2).distance(f);
    Ok(RieszRefinement {
        h1,
        d,
        h2,
        residual,
    })
}

/// The unitary `u in D` with `h = u k`, if `|h| = |k|` within `tol`.
///
/// `u` is `Phi(h k^{-1})` re-unitarized block by block and is then checked
/// against `|h - u k|_F <= tol |k|_F`.
pub fn d_unitary_between(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    k: &ComplexMatrix,
    tol: f64,
) -> Result<Option<ComplexMatrix>, FactorizeError> {
    for x in [h, k] {
        if !is_outer(ctx, x, DEFAULT_DET_TOL)?.by_determinant {
            return Err(FactorizeError::NotOuter);
        }
    }
    let abs_h = crate::matfun::abs_op(h);
    let abs_k = crate::matfun::abs_op(k);
    if abs_h.distance(&abs_k) > tol * (1.0 + abs_k.frobenius_norm()) {
        return Ok(None);
    }
    let ratio = h.matmul(&crate::matfun::inverse(k)?);
    let u = polar_unitary(&ctx.phi(&ratio)?, DEFAULT_RANK_TOL).unitary;
    let u = ctx.phi(&u)?;
    if h.distance(&u.matmul(k)) <= tol * k.frobenius_norm() {
        Ok(Some(u))
    } else {
        Ok(None)
    }
}
