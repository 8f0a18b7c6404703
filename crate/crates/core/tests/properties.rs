use proptest::prelude::*;
use subdiag_core::algebra::{Part, SubdiagonalContext};
use subdiag_core::circle::{circle_delta, conjugate_fn, outer_part, CircleFunction};
use subdiag_core::factorize::{beurling_nevanlinna, is_outer, project_onto_ka0, Side};
use subdiag_core::fkdet::{delta, fk_det};
use subdiag_core::harness::{
    campaign, random_ensemble, CampaignConfig, EnsembleKind, EnsembleSpec, Sequential, Suite,
    Trial, TrialMap,
};
use subdiag_core::matfun::{abs_op, herm_apply, polar_unitary, MatFn, DEFAULT_RANK_TOL};
use subdiag_core::matrix::{ComplexMatrix, C64};
use subdiag_core::szego::{szego_infimum, SzegoMode, SzegoObjective};

fn blocks_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 1..=4)
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n).prop_map(move |v| {
        ComplexMatrix::from_vec(n, n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect())
            .unwrap()
    })
}

/// Block sizes together with a matrix of matching order.
fn ctx_and_matrix() -> impl Strategy<Value = (SubdiagonalContext, ComplexMatrix)> {
    blocks_strategy().prop_flat_map(|sizes| {
        let n = sizes.iter().sum();
        (Just(SubdiagonalContext::from_sizes(sizes).unwrap()), matrix(n))
    })
}

fn positive(a: &ComplexMatrix) -> ComplexMatrix {
    let mut m = a.adjoint_mul(a).hermitian_part();
    for i in 0..m.rows() {
        m[(i, i)] += 0.1;
    }
    m
}

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_ignores_adjoint_and_modulus(a in (2usize..=6).prop_flat_map(matrix)) {
        let d = delta(&a);
        prop_assert!(rel(d, delta(&a.adjoint())) <= 1e-9);
        prop_assert!(rel(d, delta(&abs_op(&a))) <= 1e-9);
    }

    #[test]
    fn determinant_is_multiplicative(
        (a, b) in (2usize..=6).prop_flat_map(|n| (matrix(n), matrix(n)))
    ) {
        let want = delta(&a) * delta(&b);
        prop_assume!(want > 1e-6);
        prop_assert!(rel(delta(&a.matmul(&b)), want) <= 1e-9);
    }

    #[test]
    fn determinant_is_homogeneous(a in (2usize..=5).prop_flat_map(matrix), s in 0.1f64..10.0, phase in 0.0f64..6.0) {
        let z = C64::from_polar(s, phase);
        prop_assert!(rel(delta(&a.scale(z)), s * delta(&a)) <= 1e-9);
    }

    #[test]
    fn regularized_determinant_grows_with_epsilon(a in (2usize..=5).prop_flat_map(matrix), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(fk_det(&a, Some(hi)).value >= fk_det(&a, Some(lo)).value);
        prop_assert!(fk_det(&a, Some(lo)).value >= fk_det(&a, None).value);
    }

    #[test]
    fn pinching_preserves_trace_and_is_idempotent((c, a) in ctx_and_matrix()) {
        let p = c.phi(&a).unwrap();
        prop_assert!((c.tau(&p) - c.tau(&a)).norm() <= 1e-12 * (1.0 + a.max_abs()));
        prop_assert_eq!(c.phi(&p).unwrap(), p.clone());
        prop_assert_eq!(c.membership_distance(&p, Part::D).unwrap(), 0.0);
    }

    #[test]
    fn pinching_is_multiplicative_on_a((c, a, b) in ctx_and_matrix().prop_flat_map(|(c, a)| {
        let n = c.n();
        (Just(c), Just(a), matrix(n))
    })) {
        let a = c.project(&a, Part::A).unwrap();
        let b = c.project(&b, Part::A).unwrap();
        let lhs = c.phi(&a.matmul(&b)).unwrap();
        let rhs = c.phi(&a).unwrap().matmul(&c.phi(&b).unwrap());
        prop_assert!(lhs.distance(&rhs) <= 1e-12 * (1.0 + lhs.frobenius_norm()));
    }

    #[test]
    fn pinching_contracts_p_norms((c, a) in ctx_and_matrix(), p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0, f64::INFINITY])) {
        let phi = c.phi(&a).unwrap();
        prop_assert!(c.p_norm(&phi, p).unwrap() <= c.p_norm(&a, p).unwrap() + 1e-10);
    }

    #[test]
    fn parts_split_the_ambient_algebra((c, a) in ctx_and_matrix()) {
        let a0 = c.project(&a, Part::A0).unwrap();
        let d = c.project(&a, Part::D).unwrap();
        let lower = c.adjoint().project(&a, Part::A0).unwrap();
        prop_assert_eq!(a0.add_ref(&d).add_ref(&lower), a.clone());
        prop_assert_eq!(c.project(&a, Part::A).unwrap(), a0.add_ref(&d));
    }

    #[test]
    fn polar_parts_reconstruct(a in (1usize..=6).prop_flat_map(matrix)) {
        let p = polar_unitary(&a, DEFAULT_RANK_TOL);
        prop_assert!(p.unitary.unitarity_defect() <= 1e-10);
        prop_assert!(p.unitary.matmul(&p.modulus).distance(&a) <= 1e-10 * (1.0 + a.frobenius_norm()));
    }

    #[test]
    fn exp_inverts_log(a in (1usize..=6).prop_flat_map(matrix)) {
        let h = positive(&a);
        let back = herm_apply(&herm_apply(&h, MatFn::Log).unwrap(), MatFn::Exp).unwrap();
        prop_assert!(back.distance(&h) <= 1e-10 * h.frobenius_norm());
    }

    #[test]
    fn ul_factor_lies_in_a((c, a) in ctx_and_matrix()) {
        let m = positive(&a);
        let f = c.ul_factor(&m).unwrap();
        prop_assert_eq!(c.membership_distance(&f, Part::A).unwrap(), 0.0);
        prop_assert!(f.mul_adjoint(&f).distance(&m) <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn closed_form_is_a_lower_bound(
        (a, g) in (2usize..=5).prop_flat_map(|n| (matrix(n), matrix(n))),
        pq in prop::sample::select(vec![(2.0, 1.0), (1.0, 1.0), (2.0, 2.0), (1.0, 2.0), (3.0, 1.5)]),
    ) {
        let h = positive(&a);
        let (p, q) = pq;
        let obj = SzegoObjective::new(&h, p, q).unwrap();
        let c = SubdiagonalContext::from_sizes(vec![h.rows()]).unwrap();
        let e = szego_infimum(&c, &h, p, q, SzegoMode::ClosedForm).unwrap();
        prop_assert!(e.gap <= 1e-10 * e.target);
        // any b >= 0 with Delta(b) = 1
        let b = positive(&g);
        let b = b.scale_real(1.0 / delta(&b));
        prop_assert!(obj.eval(&b) >= e.value * (1.0 - 1e-9));
    }

    #[test]
    fn factorization_has_unitary_and_outer_parts((c, k) in ctx_and_matrix()) {
        prop_assume!(delta(&k) > 1e-6 * k.max_abs());
        for side in [Side::Right, Side::Left] {
            let f = beurling_nevanlinna(&c, &k, side, 1e-10).unwrap();
            prop_assert!(f.u.unitarity_defect() <= 1e-9);
            prop_assert!(f.residual_reconstruction <= 1e-8 * (1.0 + k.frobenius_norm()));
            let (owner, h) = match side {
                Side::Right => (c.clone(), f.h.clone()),
                Side::Left => (c.adjoint(), f.h.adjoint()),
            };
            prop_assert_eq!(owner.membership_distance(&h, Part::A).unwrap(), 0.0);
            prop_assert!(is_outer(&owner, &h, 1e-7).unwrap().by_determinant);
        }
    }

    #[test]
    fn projection_residual_gram_is_block_diagonal((c, k) in ctx_and_matrix()) {
        let (v, diag) = project_onto_ka0(&c, &k).unwrap();
        prop_assert!(diag.off_block_mass <= 1e-8 * (1.0 + k.frobenius_norm_sqr()));
        prop_assert!(diag.det_excess >= -1e-9 * (1.0 + delta(&k)));
        prop_assert!(v.is_finite());
    }

    #[test]
    fn conjugation_twice_negates_the_mean_free_part(v in prop::collection::vec(-1.0f64..1.0, 64)) {
        let u = CircleFunction::from_real(&v).unwrap();
        let twice = conjugate_fn(&conjugate_fn(&u).unwrap()).unwrap();
        let c = u.coefficients();
        let nyquist = c[32].re;
        let mean = c[0].re;
        for (j, (a, b)) in twice.samples().iter().zip(&v).enumerate() {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let want = -(b - mean - nyquist * sign);
            prop_assert!((a.re - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn outer_part_keeps_modulus_and_determinant(v in prop::collection::vec(0.1f64..5.0, 256)) {
        let f = CircleFunction::from_real(&v).unwrap();
        let h = outer_part(&f).unwrap();
        for (a, b) in h.modulus().iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
        prop_assert!(rel(circle_delta(&h), circle_delta(&f)) <= 1e-12);
    }

    #[test]
    fn ensembles_are_reproducible(sizes in blocks_strategy(), seed in any::<u64>(), kind in prop::sample::select(vec![
        EnsembleKind::Ginibre, EnsembleKind::TriangularInA, EnsembleKind::Positive, EnsembleKind::Unitary, EnsembleKind::InD,
    ])) {
        let blocks = subdiag_core::algebra::BlockStructure::new(sizes).unwrap();
        let spec = EnsembleSpec { kind, n: blocks.n(), blocks, seed, scale: 1.0 };
        prop_assert_eq!(random_ensemble(&spec).unwrap(), random_ensemble(&spec).unwrap());
    }
}

/// Runs trials back to front, as an out-of-order scheduler might.
struct Reversed;

impl TrialMap for Reversed {
    fn map_trials(&self, count: usize, f: &(dyn Fn(usize) -> Trial + Sync)) -> Vec<Trial> {
        let mut out: Vec<Trial> = (0..count).rev().map(f).collect();
        out.reverse();
        out
    }
}

#[test]
fn campaign_report_does_not_depend_on_schedule() {
    let config = CampaignConfig {
        suites: vec![Suite::Fkdet, Suite::Jensen, Suite::Outer],
        trials: 60,
        seed: 5,
        ..CampaignConfig::default()
    };
    let a = campaign(&config, &Sequential).unwrap();
    let b = campaign(&config, &Reversed).unwrap();
    assert_eq!(a, b);
}
