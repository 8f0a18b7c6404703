//! Variational determinant formulas: the Szegő infimum
//! `inf { tau(|h^{q/p} b|^p)^{1/q} : Delta(b) >= 1 }`, its lift into `A`,
//! the restricted search over `D`, `delta(h)` and the wandering-subspace
//! criterion for outers.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgebraError, Part, SubdiagonalContext, MEMBERSHIP_TOL};
use crate::fkdet::{delta, fk_det};
use crate::matfun::{
    herm_apply, orth_project, orthonormalize, project_onto_orthonormal, singular_values,
    HermitianSpectrum, MatError, MatFn, HERMITIAN_TOL,
};
use crate::matrix::{ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SzegoError {
    #[error("closed form needs a positive definite h, smallest eigenvalue is {min:e}")]
    SingularInput { min: f64 },
    #[error("h is not positive semidefinite (smallest eigenvalue {min:e})")]
    NotPositive { min: f64 },
    #[error("exponents must be positive and finite, got p = {p}, q = {q}")]
    InvalidExponent { p: f64, q: f64 },
    #[error("element is not in A (distance {distance:e})")]
    NotInA { distance: f64 },
    #[error("degenerate check failed: value {value} against determinant {target}")]
    Mismatch { value: f64, target: f64 },
    #[error(transparent)]
    Matrix(#[from] MatError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SzegoMode {
    ClosedForm,
    WitnessA,
    SearchD,
}

#[derive(Debug, Clone)]
pub struct SzegoEstimate {
    pub value: f64,
    /// `b` for the closed form and the search, `a in A` for the lift.
    pub witness: ComplexMatrix,
    pub mode: SzegoMode,
    /// `|value - Delta(h)|`.
    pub gap: f64,
    /// `Delta(h)` computed independently of the optimizer.
    pub target: f64,
    /// False only when the search ran out of iterations.
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iterations: usize,
    pub step_tol: f64,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: 8,
            max_iterations: 500,
            step_tol: 1e-10,
            seed: 0,
        }
    }
}

fn check_exponents(p: f64, q: f64) -> Result<(), SzegoError> {
    let ok = |x: f64| x.is_finite() && x > 0.0;
    if ok(p) && ok(q) {
        Ok(())
    } else {
        Err(SzegoError::InvalidExponent { p, q })
    }
}

/// `b -> tau(|h^{q/p} b|^p)^{1/q}` with `h` diagonalized once.
///
/// Products are formed in the eigenbasis of `h`, where `h^{q/p}` is a
/// diagonal scaling; singular values are then taken of the column-scaled
/// adjoint, for which the one-sided Jacobi iteration is accurate even when
/// `h` is badly conditioned.
#[derive(Debug, Clone)]
pub struct SzegoObjective {
    spectrum: HermitianSpectrum,
    p: f64,
    q: f64,
    powers: Vec<f64>,
}

impl SzegoObjective {
    pub fn new(h: &ComplexMatrix, p: f64, q: f64) -> Result<Self, SzegoError> {
        check_exponents(p, q)?;
        let spectrum = HermitianSpectrum::new(h)?;
        let floor = -HERMITIAN_TOL * (1.0 + spectrum.max().abs());
        if spectrum.min() < floor {
            return Err(SzegoError::NotPositive {
                min: spectrum.min(),
            });
        }
        let r = q / p;
        let powers = spectrum.eigenvalues.iter().map(|&l| l.max(0.0).powf(r)).collect();
        Ok(Self {
            spectrum,
            p,
            q,
            powers,
        })
    }

    pub fn spectrum(&self) -> &HermitianSpectrum {
        &self.spectrum
    }

    pub fn exponents(&self) -> (f64, f64) {
        (self.p, self.q)
    }

    /// `V^* b V`.
    pub fn to_eigen(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.spectrum.eigenvectors;
        v.adjoint_mul(&b.matmul(v))
    }

    /// `V b V^*`.
    pub fn from_eigen(&self, bt: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.spectrum.eigenvectors;
        v.matmul(bt).mul_adjoint(v)
    }

    /// Objective at `b = V bt V^*`.
    pub fn eval_eigen(&self, bt: &ComplexMatrix) -> f64 {
        // (Lambda^r bt)^* = bt^* Lambda^r scales columns
        let n = bt.rows();
        let y = ComplexMatrix::from_fn(n, n, |i, j| bt[(j, i)].conj() * self.powers[j]);
        self.power_mean(&y)
    }

    /// `tau(|b h^{q/p}|^p)^{1/q}` at `b = V bt V^*`.
    pub fn eval_eigen_right(&self, bt: &ComplexMatrix) -> f64 {
        let n = bt.rows();
        let y = ComplexMatrix::from_fn(n, n, |i, j| bt[(i, j)] * self.powers[j]);
        self.power_mean(&y)
    }

    pub fn eval(&self, b: &ComplexMatrix) -> f64 {
        self.eval_eigen(&self.to_eigen(b))
    }

    pub fn eval_right(&self, b: &ComplexMatrix) -> f64 {
        self.eval_eigen_right(&self.to_eigen(b))
    }

    fn power_mean(&self, x: &ComplexMatrix) -> f64 {
        let n = x.rows() as f64;
        let mean = if self.p == 2.0 {
            x.frobenius_norm_sqr() / n
        } else {
            singular_values(x).iter().map(|s| s.powf(self.p)).sum::<f64>() / n
        };
        mean.powf(1.0 / self.q)
    }

    /// `Delta(h)` from the eigenvalues.
    pub fn spectral_det(&self) -> f64 {
        let n = self.spectrum.eigenvalues.len() as f64;
        let s: f64 = self.spectrum.eigenvalues.iter().map(|l| l.max(0.0).ln()).sum();
        (s / n).exp()
    }

    /// Closed-form optimum in the eigenbasis, `diag(c lambda^{-q/p})` with
    /// `c = Delta(h)^{q/p}`. Needs `lambda_min > 0`.
    pub fn optimal_eigen(&self) -> Result<ComplexMatrix, SzegoError> {
        let min = self.spectrum.min();
        if min <= 0.0 {
            return Err(SzegoError::SingularInput { min });
        }
        let r = self.q / self.p;
        let c = self.spectral_det().powf(r);
        let d: Vec<f64> = self.spectrum.eigenvalues.iter().map(|&l| c * l.powf(-r)).collect();
        Ok(ComplexMatrix::from_real_diag(&d))
    }
}

/// The Szegő infimum for `h >= 0` in the requested mode.
pub fn szego_infimum(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    p: f64,
    q: f64,
    mode: SzegoMode,
) -> Result<SzegoEstimate, SzegoError> {
    szego_infimum_with(ctx, h, p, q, mode, &SearchOptions::default())
}

pub fn szego_infimum_with(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    p: f64,
    q: f64,
    mode: SzegoMode,
    options: &SearchOptions,
) -> Result<SzegoEstimate, SzegoError> {
    ctx.check_shape(h)?;
    let obj = SzegoObjective::new(h, p, q)?;
    let target = fk_det(h, None).value;
    match mode {
        SzegoMode::ClosedForm => {
            let bt = obj.optimal_eigen()?;
            let value = obj.eval_eigen(&bt);
            Ok(SzegoEstimate {
                value,
                witness: obj.from_eigen(&bt).hermitian_part(),
                mode,
                gap: (value - target).abs(),
                target,
                converged: true,
            })
        }
        SzegoMode::WitnessA => {
            let bt = obj.optimal_eigen()?;
            let b2 = obj.from_eigen(&bt.matmul(&bt)).hermitian_part();
            let a = ctx.ul_factor(&b2)?;
            let value = obj.eval(&a);
            Ok(SzegoEstimate {
                value,
                witness: a,
                mode,
                gap: (value - target).abs(),
                target,
                converged: true,
            })
        }
        SzegoMode::SearchD => {
            let (b, value, converged) = search_d(ctx, &obj, options);
            Ok(SzegoEstimate {
                value,
                witness: b,
                mode,
                gap: (value - target).abs(),
                target,
                converged,
            })
        }
    }
}

/// Hermitian element of `D` with trace zero from real parameters: per block,
/// the diagonal entries followed by real and imaginary parts above it.
fn assemble_d(ctx: &SubdiagonalContext, params: &[f64]) -> ComplexMatrix {
    let n = ctx.n();
    let blocks = ctx.blocks();
    let mut x = ComplexMatrix::zeros(n, n);
    let mut k = 0;
    for b in 0..blocks.len() {
        let off = blocks.offset(b);
        let s = blocks.sizes()[b];
        for i in 0..s {
            x[(off + i, off + i)] = C64::new(params[k], 0.0);
            k += 1;
        }
        for i in 0..s {
            for j in i + 1..s {
                let z = C64::new(params[k], params[k + 1]);
                k += 2;
                x[(off + i, off + j)] = z;
                x[(off + j, off + i)] = z.conj();
            }
        }
    }
    let shift = x.normalized_trace().re;
    for i in 0..n {
        x[(i, i)] -= shift;
    }
    x
}

fn search_d(
    ctx: &SubdiagonalContext,
    obj: &SzegoObjective,
    options: &SearchOptions,
) -> (ComplexMatrix, f64, bool) {
    let dim = ctx.dimension(Part::D);
    let eval = |params: &[f64]| -> f64 {
        let x = assemble_d(ctx, params);
        match herm_apply(&x, MatFn::Exp) {
            Ok(b) => obj.eval(&b),
            Err(_) => f64::INFINITY,
        }
    };
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for start in 0..options.starts.max(1) {
        let x0: Vec<f64> = if start == 0 {
            alloc::vec![0.0; dim]
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ start as u64);
            (0..dim).map(|_| 0.5 * rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let (x, fx, converged) = bfgs(&eval, x0, options.max_iterations, options.step_tol);
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx, converged));
        }
    }
    let (x, fx, converged) = best.expect("at least one start");
    let b = herm_apply(&assemble_d(ctx, &x), MatFn::Exp).expect("Hermitian by construction");
    (b, fx, converged)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn numerical_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let step = 1e-6 * (1.0 + x[i].abs());
            xp[i] = x[i] + step;
            let fp = f(&xp);
            xp[i] = x[i] - step;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// Quasi-Newton descent with central-difference gradients and Armijo
/// backtracking. Returns `(x, f(x), converged)`.
fn bfgs(
    f: &impl Fn(&[f64]) -> f64,
    mut x: Vec<f64>,
    max_iterations: usize,
    step_tol: f64,
) -> (Vec<f64>, f64, bool) {
    let m = x.len();
    let mut fx = f(&x);
    if m == 0 {
        return (x, fx, true);
    }
    let identity = |m: usize| {
        let mut h = alloc::vec![0.0; m * m];
        for i in 0..m {
            h[i * m + i] = 1.0;
        }
        h
    };
    let mut hinv = identity(m);
    let mut g = numerical_gradient(f, &x);
    for _ in 0..max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= 1e-12 * (1.0 + fx.abs()) {
            return (x, fx, true);
        }
        let mut d: Vec<f64> = (0..m).map(|i| -dot(&hinv[i * m..(i + 1) * m], &g)).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hinv = identity(m);
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let dnorm = dot(&d, &d).sqrt();
        let mut t = 1.0;
        let (x_new, f_new) = loop {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let ft = f(&trial);
            if ft <= fx + 1e-4 * t * slope {
                break (trial, ft);
            }
            t *= 0.5;
            if t * dnorm < step_tol {
                return (x, fx, true);
            }
        };
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let g_new = numerical_gradient(f, &x_new);
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = x_new;
        fx = f_new;
        g = g_new;
        if dot(&s, &s).sqrt() < step_tol {
            return (x, fx, true);
        }
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..m).map(|i| dot(&hinv[i * m..(i + 1) * m], &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..m {
                for j in 0..m {
                    hinv[i * m + j] += -rho * (hy[i] * s[j] + s[i] * hy[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
        }
    }
    (x, fx, false)
}

/// `delta(h) = inf { tau(|h^{1/2}(1 - a0)|^2) : a0 in A_0 }`, exactly, as the
/// squared distance from `h^{1/2}` to `h^{1/2} A_0`.
pub fn small_delta(ctx: &SubdiagonalContext, h: &ComplexMatrix) -> Result<f64, SzegoError> {
    ctx.check_shape(h)?;
    let k = herm_apply(h, MatFn::Sqrt)?;
    let basis: Vec<ComplexMatrix> = ctx.a0_basis().iter().map(|e| k.matmul(e)).collect();
    let proj = orth_project(&k, &basis);
    Ok(proj.residual.inner(&proj.residual).re)
}

/// `Delta(a) - Delta(Phi(a))`, nonnegative for `a in A` up to roundoff.
pub fn jensen_margin(ctx: &SubdiagonalContext, a: &ComplexMatrix) -> Result<f64, SzegoError> {
    Ok(delta(a) - delta(&ctx.phi(a)?))
}

#[derive(Debug, Clone)]
pub struct TonaReport {
    /// `|Phi(h)|_2^2`.
    pub phi_norm_sqr: f64,
    /// `inf tau(|h(1 - a0)|^2)` over `A_0`.
    pub infimum: f64,
    pub norm_equality: bool,
    /// Orthonormal basis of `span(hA) - span(hA_0)`.
    pub wandering_basis: Vec<ComplexMatrix>,
    pub has_invertible_wandering: bool,
    pub verdict: bool,
}

/// Random combinations tried when looking for an invertible wandering
/// vector; a generic combination is invertible as soon as one exists.
const WANDERING_TRIES: u64 = 16;

/// The wandering-subspace criterion for `h in A` to be outer.
///
/// In the block model `W = uD` for a unitary `u` exactly when
/// `dim W = dim D` and `W` contains an invertible element; both are tested,
/// together with `|Phi(h)|_2^2 = inf tau(|h(1 - a0)|^2)`.
pub fn tona_check(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<TonaReport, SzegoError> {
    ctx.check_shape(h)?;
    let distance = ctx.membership_distance(h, Part::A)?;
    if distance > MEMBERSHIP_TOL * h.frobenius_norm() {
        return Err(SzegoError::NotInA { distance });
    }
    let h_a0: Vec<ComplexMatrix> = ctx.a0_basis().iter().map(|e| h.matmul(e)).collect();
    let q0 = orthonormalize(&h_a0);

    let phi = ctx.phi(h)?;
    let phi_norm_sqr = phi.inner(&phi).re;
    let res = project_onto_orthonormal(h, &q0).residual;
    let infimum = res.inner(&res).re;
    let scale = h.inner(h).re;
    let norm_equality = (phi_norm_sqr - infimum).abs() <= tol * (1.0 + scale);

    let residuals: Vec<ComplexMatrix> = ctx
        .basis(Part::D)
        .iter()
        .map(|e| project_onto_orthonormal(&h.matmul(e), &q0).residual)
        .collect();
    // relative rank cut against the size of h
    let wandering_basis: Vec<ComplexMatrix> = orthonormalize(
        &residuals
            .into_iter()
            .filter(|r| r.frobenius_norm() > tol * (1.0 + h.frobenius_norm()))
            .collect::<Vec<_>>(),
    );
    let has_invertible_wandering = wandering_basis.len() == ctx.dimension(Part::D)
        && find_invertible(&wandering_basis, tol).is_some();
    Ok(TonaReport {
        phi_norm_sqr,
        infimum,
        norm_equality,
        verdict: norm_equality && has_invertible_wandering,
        wandering_basis,
        has_invertible_wandering,
    })
}

fn find_invertible(basis: &[ComplexMatrix], tol: f64) -> Option<ComplexMatrix> {
    let n = basis.first()?.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a6f);
    for _ in 0..WANDERING_TRIES {
        let mut w = ComplexMatrix::zeros(n, n);
        for b in basis {
            let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            w.axpy(c, b);
        }
        let r = fk_det(&w, None);
        let smax = r.singular_values.first().copied().unwrap_or(0.0);
        if smax > 0.0 && r.value > tol * smax {
            return Some(w);
        }
    }
    None
}

/// Finite-dimensional form of the determinant formula for the functional
/// `omega = tau(h .)`: `inf omega(a^* a)` over `a in A` with
/// `Delta(Phi(a)) >= 1` equals `Delta(h)`.
///
/// The optimum `a^* a = Delta(h) h^{-1}` is realized by the adjoint of the
/// factor of `Delta(h) h^{-1}` in `A^*`, which lies in `A`. Fails with `Mismatch` when
/// `|value - Delta(h)| > tol * Delta(h)`.
pub fn skk_degenerate_check(
    ctx: &SubdiagonalContext,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<SzegoEstimate, SzegoError> {
    ctx.check_shape(h)?;
    let obj = SzegoObjective::new(h, 2.0, 1.0)?;
    let bt = obj.optimal_eigen()?;
    let b2 = obj.from_eigen(&bt.matmul(&bt)).hermitian_part();
    let lower = ctx.adjoint().ul_factor(&b2)?;
    let a = lower.adjoint();
    // tau(h a^* a) = |a h^{1/2}|_2^2, column scaling in the eigenbasis
    let av = a.matmul(&obj.spectrum().eigenvectors);
    let n = h.rows();
    let lam = &obj.spectrum().eigenvalues;
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| av[(i, j)] * lam[j].max(0.0).sqrt());
    let value = scaled.frobenius_norm_sqr() / n as f64;
    let target = fk_det(h, None).value;
    let gap = (value - target).abs();
    if gap > tol * target {
        return Err(SzegoError::Mismatch { value, target });
    }
    Ok(SzegoEstimate {
        value,
        witness: a,
        mode: SzegoMode::WitnessA,
        gap,
        target,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockStructure;
    use crate::matrix::ZERO;

    fn ctx(sizes: &[usize]) -> SubdiagonalContext {
        SubdiagonalContext::new(BlockStructure::new(sizes.to_vec()).unwrap())
    }

    #[test]
    fn closed_form_diag_1_4() {
        let h = ComplexMatrix::from_real_diag(&[1.0, 4.0]);
        let e = szego_infimum(&ctx(&[1, 1]), &h, 2.0, 1.0, SzegoMode::ClosedForm).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
        let s = 2f64.sqrt();
        assert!(e.witness.distance(&ComplexMatrix::from_real_diag(&[s, s / 2.0])) < 1e-14);
        assert!((delta(&e.witness) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_its_own_optimum() {
        let h = ComplexMatrix::identity(3);
        for (p, q) in [(2.0, 1.0), (1.0, 1.0), (3.0, 0.5)] {
            let e = szego_infimum(&ctx(&[1, 2]), &h, p, q, SzegoMode::ClosedForm).unwrap();
            assert!((e.value - 1.0).abs() < 1e-14);
            assert!(e.witness.distance(&h) < 1e-14);
        }
    }

    #[test]
    fn witness_in_a_for_diag_1_4() {
        let c = ctx(&[1, 1]);
        let h = ComplexMatrix::from_real_diag(&[1.0, 4.0]);
        let e = szego_infimum(&c, &h, 2.0, 1.0, SzegoMode::WitnessA).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6);
        assert_eq!(c.membership_distance(&e.witness, Part::A).unwrap(), 0.0);
        // ul_factor(2 diag(1, 1/4)) = diag(sqrt 2, 1/sqrt 2)
        let s = 2f64.sqrt();
        assert!(e.witness.distance(&ComplexMatrix::from_real_diag(&[s, 1.0 / s])) < 1e-14);
    }

    #[test]
    fn singular_h_has_no_closed_form() {
        let h = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert!(matches!(
            szego_infimum(&ctx(&[2]), &h, 2.0, 1.0, SzegoMode::ClosedForm),
            Err(SzegoError::SingularInput { .. })
        ));
        assert!(matches!(
            szego_infimum(&ctx(&[2]), &h, 0.0, 1.0, SzegoMode::ClosedForm),
            Err(SzegoError::InvalidExponent { .. })
        ));
    }

    #[test]
    fn search_in_d_finds_diagonal_optimum() {
        let h = ComplexMatrix::from_real_diag(&[1.0, 4.0, 0.5]);
        let c = ctx(&[1, 1, 1]);
        let opts = SearchOptions {
            starts: 2,
            ..SearchOptions::default()
        };
        for (p, q) in [(2.0, 1.0), (1.0, 1.0)] {
            let e = szego_infimum_with(&c, &h, p, q, SzegoMode::SearchD, &opts).unwrap();
            assert!(e.converged);
            assert!(e.gap < 1e-6 * e.target, "{} {}", e.value, e.target);
            assert!((delta(&e.witness) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn small_delta_examples() {
        let h = ComplexMatrix::from_real(&[&[2.0, 1.0], &[1.0, 3.0]]);
        // A = M: delta(h) = tau(h)
        assert!((small_delta(&ctx(&[2]), &h).unwrap() - 2.5).abs() < 1e-14);
        assert!((small_delta(&ctx(&[1, 1]), &ComplexMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        let d = ComplexMatrix::from_real_diag(&[1.0, 2.0, 5.0]);
        assert!((small_delta(&ctx(&[1, 2]), &d).unwrap() - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tona_examples() {
        let c = ctx(&[1, 1]);
        let h = ComplexMatrix::from_real(&[&[1.0, 5.0], &[0.0, 2.0]]);
        let r = tona_check(&c, &h, 1e-10).unwrap();
        assert!(r.norm_equality && r.has_invertible_wandering && r.verdict);
        assert!((r.phi_norm_sqr - 2.5).abs() < 1e-14);

        let r = tona_check(&c, &ComplexMatrix::unit(2, 0, 1), 1e-10).unwrap();
        assert!(!r.verdict && !r.norm_equality);
        assert_eq!(r.phi_norm_sqr, 0.0);
        assert!((r.infimum - 0.5).abs() < 1e-15);

        let u = ComplexMatrix::from_diag(&[C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]);
        assert!(tona_check(&c, &u, 1e-10).unwrap().verdict);

        assert!(matches!(
            tona_check(&c, &ComplexMatrix::unit(2, 1, 0), 1e-10),
            Err(SzegoError::NotInA { .. })
        ));
    }

    #[test]
    fn skk_examples() {
        let c = ctx(&[1, 1]);
        let e = skk_degenerate_check(&c, &ComplexMatrix::identity(2), 1e-12).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
        let h = ComplexMatrix::from_real_diag(&[1.0, 4.0]);
        let e = skk_degenerate_check(&c, &h, 1e-12).unwrap();
        assert!((e.value - 2.0).abs() < 1e-14);
        assert_eq!(c.membership_distance(&e.witness, Part::A).unwrap(), 0.0);
    }

    #[test]
    fn zero_entries_stay_zero_in_assembly() {
        let c = ctx(&[2, 1]);
        let x = assemble_d(&c, &[1.0, 2.0, 0.5, -0.5, 3.0]);
        assert_eq!(x[(0, 2)], ZERO);
        assert!(x.normalized_trace().norm() < 1e-15);
        assert_eq!(x.hermitian_defect(), 0.0);
    }
}
