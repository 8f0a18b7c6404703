//! Seeded random ensembles and property campaigns.
//!
//! Trial `i` of a campaign with seed `s` draws everything from a ChaCha
//! stream keyed by `s ^ i` (and a per-suite stream id), so results do not
//! depend on how trials are scheduled. Executors only decide where trials
//! run; aggregation always walks trials in index order.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{BlockStructure, Part, SubdiagonalContext};
use crate::circle::{self, CircleFunction};
use crate::factorize::{
    beurling_nevanlinna, d_unitary_between, is_outer, project_onto_ka0, qr_oracle,
    riesz_refinement, riesz_szego_lift, Side, DEFAULT_DET_TOL,
};
use crate::fkdet::{delta, fk_det, log_abs};
use crate::matfun::{
    abs_op, herm_apply, orth_project, polar_unitary, HermitianSpectrum, Lu, MatFn,
    DEFAULT_RANK_TOL,
};
use crate::matrix::{ComplexMatrix, C64};
use crate::szego::{
    skk_degenerate_check, small_delta, szego_infimum, tona_check, SzegoMode, SzegoObjective,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(&'static str),
    #[error("invalid campaign config: {0}")]
    ConfigError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Ginibre,
    TriangularInA,
    Positive,
    Unitary,
    InD,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub blocks: BlockStructure,
    pub seed: u64,
    pub scale: f64,
}

/// One matrix from `spec`; bit-identical for identical specs.
pub fn random_ensemble(spec: &EnsembleSpec) -> Result<ComplexMatrix, HarnessError> {
    if spec.n == 0 {
        return Err(HarnessError::InvalidSpec("n must be positive"));
    }
    if spec.blocks.n() != spec.n {
        return Err(HarnessError::InvalidSpec("block sizes must sum to n"));
    }
    if !(spec.scale.is_finite() && spec.scale > 0.0) {
        return Err(HarnessError::InvalidSpec("scale must be positive"));
    }
    let ctx = SubdiagonalContext::new(spec.blocks.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(draw(&mut rng, spec.kind, &ctx, spec.scale))
}

fn draw(rng: &mut ChaCha8Rng, kind: EnsembleKind, ctx: &SubdiagonalContext, scale: f64) -> ComplexMatrix {
    let n = ctx.n();
    let g = ginibre(rng, n, scale);
    match kind {
        EnsembleKind::Ginibre => g,
        EnsembleKind::TriangularInA => ctx.project(&g, Part::A).expect("shape"),
        EnsembleKind::InD => ctx.phi(&g).expect("shape"),
        EnsembleKind::Positive => {
            let mut m = g.adjoint_mul(&g).hermitian_part();
            for i in 0..n {
                m[(i, i)] += 1e-6 * scale;
            }
            m
        }
        EnsembleKind::Unitary => polar_unitary(&g, DEFAULT_RANK_TOL).unitary,
    }
}

/// iid entries `scale * (x + iy) / sqrt 2`, `x, y` standard normal.
pub fn ginibre(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> ComplexMatrix {
    let s = scale * core::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal) * s, rng.sample::<f64, _>(StandardNormal) * s)
    })
}

/// Block sizes of a uniformly chosen composition of `n`.
pub fn random_blocks(rng: &mut ChaCha8Rng, n: usize) -> BlockStructure {
    let mut sizes = Vec::new();
    let mut run = 1;
    for _ in 1..n {
        if rng.random::<bool>() {
            sizes.push(run);
            run = 1;
        } else {
            run += 1;
        }
    }
    sizes.push(run);
    BlockStructure::new(sizes).expect("composition of n")
}

/// Everything a trial produces: one margin per property of its suite
/// (`margin >= -tolerance` passes) and the primary input, kept for replay.
#[derive(Debug, Clone)]
pub struct Trial {
    pub margins: Vec<f64>,
    pub input: ComplexMatrix,
    pub blocks: Vec<usize>,
    pub skipped: bool,
}

/// Runs `count` trials and returns them in index order.
pub trait TrialMap: Sync {
    fn map_trials(&self, count: usize, f: &(dyn Fn(usize) -> Trial + Sync)) -> Vec<Trial>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl TrialMap for Sequential {
    fn map_trials(&self, count: usize, f: &(dyn Fn(usize) -> Trial + Sync)) -> Vec<Trial> {
        (0..count).map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Matfun,
    Algebra,
    Fkdet,
    SzegoClosedForm,
    SzegoWitness,
    Jensen,
    FactorizeOracle,
    FactorizeInternals,
    Outer,
    Riesz,
    Circle,
}

pub const ALL_SUITES: [Suite; 11] = [
    Suite::Matfun,
    Suite::Algebra,
    Suite::Fkdet,
    Suite::SzegoClosedForm,
    Suite::SzegoWitness,
    Suite::Jensen,
    Suite::FactorizeOracle,
    Suite::FactorizeInternals,
    Suite::Outer,
    Suite::Riesz,
    Suite::Circle,
];

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Matfun => "matfun",
            Suite::Algebra => "algebra",
            Suite::Fkdet => "fkdet",
            Suite::SzegoClosedForm => "szego-closed-form",
            Suite::SzegoWitness => "szego-witness",
            Suite::Jensen => "jensen",
            Suite::FactorizeOracle => "factorize-oracle",
            Suite::FactorizeInternals => "factorize-internals",
            Suite::Outer => "outer",
            Suite::Riesz => "riesz",
            Suite::Circle => "circle",
        }
    }

    /// `(name, tolerance)` per property, in margin order.
    pub fn properties(self) -> &'static [(&'static str, f64)] {
        match self {
            Suite::Matfun => &[
                ("matfun.exp_log_roundtrip", 1e-9),
                ("matfun.eigen_reconstruction", 1e-10),
                ("matfun.polar_unitarity", 1e-9),
                ("matfun.polar_reconstruction", 1e-9),
                ("matfun.ul_exact_zeros", 0.0),
                ("matfun.ul_reconstruction", 1e-9),
                ("matfun.projection_orthogonality", 1e-10),
            ],
            Suite::Algebra => &[
                ("algebra.phi_trace", 1e-12),
                ("algebra.phi_multiplicative", 1e-10),
                ("algebra.phi_idempotent", 0.0),
                ("algebra.phi_contraction_p1", 1e-10),
                ("algebra.phi_contraction_p2", 1e-10),
                ("algebra.phi_contraction_pinf", 1e-10),
                ("algebra.adjoint_norm", 1e-9),
                ("algebra.dimension_count", 0.0),
            ],
            Suite::Fkdet => &[
                ("fkdet.adjoint_abs", 1e-9),
                ("fkdet.monotone", 1e-9),
                ("fkdet.power", 1e-9),
                ("fkdet.multiplicative", 1e-9),
                ("fkdet.epsilon_monotone", 1e-9),
            ],
            Suite::SzegoClosedForm => &[
                ("szego.lower_bound_p2_q1", 1e-9),
                ("szego.lower_bound_p1_q1", 1e-9),
                ("szego.lower_bound_p2_q2", 1e-9),
                ("szego.lower_bound_p1_q2", 1e-9),
                ("szego.closed_form_det", 1e-10),
                ("szego.left_right", 1e-9),
            ],
            Suite::SzegoWitness => &[
                ("szego.witness_value", 1e-6),
                ("szego.witness_phi_det", 1e-10),
                ("szego.witness_membership", 0.0),
                ("szego.skk_degenerate", 1e-6),
                ("szego.small_delta_bound", 1e-9),
            ],
            Suite::Jensen => &[("jensen.margin_in_a", 1e-10), ("jensen.equality_in_a", 1e-9)],
            Suite::FactorizeOracle => &[
                ("factorize.oracle_abs", 1e-7),
                ("factorize.unitarity", 1e-9),
                ("factorize.reconstruction", 1e-8),
                ("factorize.d_unitary", 0.0),
                ("factorize.d_unitary_unique", 1e-10),
                ("factorize.outer_certificate", 1e-8),
                ("factorize.outer_agree", 0.0),
                ("factorize.left_side", 1e-8),
                ("factorize.product_outer", 0.0),
                ("factorize.support", 0.0),
            ],
            Suite::FactorizeInternals => &[
                ("factorize.off_block_mass", 1e-8),
                ("factorize.det_excess", 1e-9),
                ("factorize.phi_of_h", 1e-8),
                ("factorize.det_chain", 1e-8),
            ],
            Suite::Outer => &[("outer.agree", 0.0), ("outer.tona_agree", 0.0)],
            Suite::Riesz => &[
                ("riesz.refinement_residual", 1e-8),
                ("riesz.refinement_det", 1e-8),
                ("riesz.refinement_phi_h1", 1e-9),
                ("riesz.lift_modulus", 1e-8),
                ("riesz.lift_det", 1e-8),
                ("riesz.lift_outer", 0.0),
            ],
            Suite::Circle => &[
                ("circle.roundtrip", 1e-8),
                ("circle.delta_preserved", 1e-8),
                ("circle.outer_criterion", 1e-6),
                ("circle.analyticity", 1e-6),
                ("circle.szego_monotone", 1e-12),
                ("circle.aliasing", 1e-8),
            ],
        }
    }

    fn stream(self) -> u64 {
        ALL_SUITES.iter().position(|&s| s == self).expect("listed") as u64 + 1
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        ALL_SUITES.iter().copied().find(|s| s.name() == name)
    }
}

/// Suites belonging to a library module name (`fkdet`, `szego`, ...), or the
/// single suite of that name.
pub fn suites_for(name: &str) -> Option<Vec<Suite>> {
    let v = match name {
        "szego" => vec![Suite::SzegoClosedForm, Suite::SzegoWitness, Suite::Jensen],
        "factorize" => vec![
            Suite::FactorizeOracle,
            Suite::FactorizeInternals,
            Suite::Outer,
            Suite::Riesz,
        ],
        "all" => ALL_SUITES.to_vec(),
        other => vec![Suite::from_name(other)?],
    };
    Some(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub suites: Vec<Suite>,
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Feasible points sampled per trial in the closed-form suite.
    pub szego_samples: usize,
    /// Grid size for the circle suite.
    pub circle_grid: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            suites: ALL_SUITES.to_vec(),
            n_min: 2,
            n_max: 8,
            trials: 1000,
            seed: 0,
            szego_samples: 1000,
            circle_grid: 1024,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let err = |m: &str| Err(HarnessError::ConfigError(m.to_string()));
        if self.suites.is_empty() {
            return err("no suites selected");
        }
        if self.n_min < 2 || self.n_min > self.n_max {
            return err("need 2 <= n_min <= n_max");
        }
        if self.trials == 0 {
            return err("trials must be positive");
        }
        if self.circle_grid < 256 || !self.circle_grid.is_power_of_two() {
            return err("circle grid must be a power of two >= 256");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: String,
    pub tolerance: f64,
    pub worst_margin: f64,
    pub worst_seed: u64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub property: String,
    pub seed: u64,
    pub margin: f64,
    pub blocks: Vec<usize>,
    pub input: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignReport {
    pub trials: usize,
    pub skipped: usize,
    pub property_results: Vec<PropertyResult>,
    pub counterexamples: Vec<Counterexample>,
    /// Distinct block structures drawn, sorted.
    pub block_structures: Vec<Vec<usize>>,
    /// Seconds; left at zero by the library and filled in by callers that
    /// have a clock.
    pub wall_time: f64,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.property_results.iter().all(|p| p.pass)
    }

    pub fn property(&self, name: &str) -> Option<&PropertyResult> {
        self.property_results.iter().find(|p| p.name == name)
    }
}

/// Counterexamples kept per property.
const MAX_COUNTEREXAMPLES: usize = 8;

pub fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs the selected suites.
pub fn campaign(config: &CampaignConfig, exec: &dyn TrialMap) -> Result<CampaignReport, HarnessError> {
    config.validate()?;
    let mut report = CampaignReport {
        trials: config.trials,
        skipped: 0,
        property_results: Vec::new(),
        counterexamples: Vec::new(),
        block_structures: Vec::new(),
        wall_time: 0.0,
    };
    for &suite in &config.suites {
        let trials = exec.map_trials(config.trials, &|i| {
            run_trial(suite, config, trial_seed(config.seed, i))
        });
        aggregate(&mut report, suite.properties(), &trials, config.seed);
    }
    Ok(report)
}

/// Re-runs one trial from its stored seed.
pub fn replay(suite: Suite, config: &CampaignConfig, seed: u64) -> Trial {
    run_trial(suite, config, seed)
}

fn aggregate(report: &mut CampaignReport, props: &[(&str, f64)], trials: &[Trial], seed: u64) {
    report.skipped += trials.iter().filter(|t| t.skipped).count();
    for t in trials {
        if let Err(i) = report.block_structures.binary_search(&t.blocks) {
            report.block_structures.insert(i, t.blocks.clone());
        }
    }
    for (p, &(name, tol)) in props.iter().enumerate() {
        let mut worst = f64::INFINITY;
        let mut worst_seed = seed;
        let mut kept = 0;
        for (i, t) in trials.iter().enumerate() {
            if t.skipped {
                continue;
            }
            let m = t.margins[p];
            let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
            if m < worst {
                worst = m;
                worst_seed = trial_seed(seed, i);
            }
            if m < -tol && kept < MAX_COUNTEREXAMPLES {
                kept += 1;
                report.counterexamples.push(Counterexample {
                    property: name.to_string(),
                    seed: trial_seed(seed, i),
                    margin: m,
                    blocks: t.blocks.clone(),
                    input: t.input.clone(),
                });
            }
        }
        if worst == f64::INFINITY {
            worst = 0.0;
        }
        report.property_results.push(PropertyResult {
            name: name.to_string(),
            tolerance: tol,
            worst_margin: worst,
            worst_seed,
            pass: worst >= -tol,
        });
    }
}

fn run_trial(suite: Suite, config: &CampaignConfig, seed: u64) -> Trial {
    let mut rng = trial_rng(seed, suite.stream());
    let n = rng.random_range(config.n_min..=config.n_max);
    let blocks = random_blocks(&mut rng, n);
    let ctx = SubdiagonalContext::new(blocks.clone());
    let (margins, input) = match suite {
        Suite::Matfun => matfun_trial(&mut rng, &ctx),
        Suite::Algebra => algebra_trial(&mut rng, &ctx),
        Suite::Fkdet => fkdet_trial(&mut rng, n),
        Suite::SzegoClosedForm => szego_closed_form_trial(&mut rng, n, config.szego_samples),
        Suite::SzegoWitness => szego_witness_trial(&mut rng, &ctx),
        Suite::Jensen => jensen_trial(&mut rng, &ctx),
        Suite::FactorizeOracle => factorize_oracle_trial(&mut rng, &ctx),
        Suite::FactorizeInternals => factorize_internals_trial(&mut rng, &ctx),
        Suite::Outer => outer_trial(&mut rng, &ctx),
        Suite::Riesz => riesz_trial(&mut rng, &ctx),
        Suite::Circle => circle_trial(&mut rng, config.circle_grid),
    };
    debug_assert_eq!(margins.len(), suite.properties().len());
    Trial {
        margins,
        input,
        blocks: blocks.sizes().to_vec(),
        skipped: false,
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        x
    } else {
        x / scale
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo..hi))
}

/// `V diag(e^{x_i}) V^*` with `x_i` uniform in `[-spread, spread]`.
fn conditioned_positive(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> ComplexMatrix {
    let v = polar_unitary(&ginibre(rng, n, 1.0), DEFAULT_RANK_TOL).unitary;
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(-spread..spread).exp()).collect();
    let scaled = ComplexMatrix::from_fn(n, n, |i, j| v[(i, j)] * d[j]);
    scaled.mul_adjoint(&v).hermitian_part()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ginibre(rng, n, 1.0 / (n as f64).sqrt()).hermitian_part()
}

fn below_block_sum(ctx: &SubdiagonalContext, a: &ComplexMatrix) -> f64 {
    let n = ctx.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if !ctx.in_part(i, j, Part::A) {
                s += a[(i, j)].norm();
            }
        }
    }
    s
}

fn matfun_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let n = ctx.n();
    let h = random_hermitian(rng, n);
    let hn = 1.0 + h.frobenius_norm();
    let e = herm_apply(&h, MatFn::Exp).expect("Hermitian");
    let l = herm_apply(&e, MatFn::Log).expect("positive");
    let exp_log = -l.distance(&h) / hn;

    let spec = HermitianSpectrum::new(&h).expect("Hermitian");
    let eig = -(spec.reassemble(&spec.eigenvalues).distance(&h) / hn)
        .max(spec.eigenvectors.unitarity_defect());

    let mut a = ginibre(rng, n, 1.0);
    if rng.random::<bool>() {
        let rank = rng.random_range(0..n);
        let left = ginibre(rng, n, 1.0);
        let mask: Vec<f64> = (0..n).map(|i| if i < rank { 1.0 } else { 0.0 }).collect();
        a = ComplexMatrix::from_fn(n, n, |i, j| left[(i, j)] * mask[j]).matmul(&a);
    }
    let polar = polar_unitary(&a, DEFAULT_RANK_TOL);
    let unitarity = -polar.unitary.unitarity_defect();
    let reconstruction = -polar.unitary.matmul(&polar.modulus).distance(&a) / (1.0 + a.frobenius_norm());

    let m = draw(rng, EnsembleKind::Positive, ctx, 1.0);
    let (ul_zeros, ul_rec) = match ctx.ul_factor(&m) {
        Ok(f) => (
            -below_block_sum(ctx, &f),
            -f.mul_adjoint(&f).distance(&m) / m.frobenius_norm(),
        ),
        Err(_) => (f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    let x = ginibre(rng, n, 1.0);
    let count = rng.random_range(1..=n * n / 2 + 1);
    let mut basis: Vec<ComplexMatrix> = (0..count)
        .map(|_| {
            let b = ginibre(rng, n, 1.0);
            let s = 1.0 / b.frobenius_norm();
            b.scale_real(s)
        })
        .collect();
    if count >= 2 {
        let d = basis[0].add_ref(&basis[1]);
        let s = 1.0 / d.frobenius_norm();
        basis.push(d.scale_real(s));
    }
    let proj = orth_project(&x, &basis);
    let ortho = basis
        .iter()
        .map(|b| proj.residual.inner(b).norm())
        .fold(0.0, f64::max);
    let projection = -ortho / x.frobenius_norm();

    (
        vec![exp_log, eig, unitarity, reconstruction, ul_zeros, ul_rec, projection],
        a,
    )
}

fn algebra_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let n = ctx.n();
    let a = ginibre(rng, n, 1.0);
    let phi = ctx.phi(&a).expect("shape");
    let trace = -(ctx.tau(&phi) - ctx.tau(&a)).norm() / a.frobenius_norm();

    let a1 = draw(rng, EnsembleKind::TriangularInA, ctx, 1.0);
    let a2 = draw(rng, EnsembleKind::TriangularInA, ctx, 1.0);
    let lhs = ctx.phi(&a1.matmul(&a2)).expect("shape");
    let rhs = ctx.phi(&a1).expect("shape").matmul(&ctx.phi(&a2).expect("shape"));
    let multiplicative = -lhs.distance(&rhs);

    let idempotent = -ctx.phi(&phi).expect("shape").distance(&phi);
    let contraction = |p: f64| ctx.p_norm(&a, p).expect("p") - ctx.p_norm(&phi, p).expect("p");

    let ps = [0.5, 1.0, 2.0, 3.0, f64::INFINITY];
    let p = ps[rng.random_range(0..ps.len())];
    let na = ctx.p_norm(&a, p).expect("p");
    let adjoint = -(na - ctx.p_norm(&a.adjoint(), p).expect("p")).abs() / na;

    let dims = ctx.dimension(Part::A) + ctx.dimension(Part::A0);
    let count = -((dims as f64) - (n * n) as f64).abs();
    (
        vec![
            trace,
            multiplicative,
            idempotent,
            contraction(1.0),
            contraction(2.0),
            contraction(f64::INFINITY),
            adjoint,
            count,
        ],
        a,
    )
}

fn fkdet_trial(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, ComplexMatrix) {
    let full = SubdiagonalContext::new(BlockStructure::single(n));
    let a = ginibre(rng, n, 1.0);
    let d = delta(&a);
    let adjoint_abs = -((d - delta(&a.adjoint())).abs().max((d - delta(&abs_op(&a))).abs())) / d;

    let g = draw(rng, EnsembleKind::Positive, &full, 1.0);
    let extra = draw(rng, EnsembleKind::Positive, &full, 1.0).scale_real(log_uniform(rng, -3.0, 0.0));
    let h = g.add_ref(&extra).hermitian_part();
    let dh = delta(&h);
    let monotone = (dh - delta(&g)) / dh;

    let p = conditioned_positive(rng, n, 1.5);
    let dp = delta(&p);
    let power = [0.5, 2.0, 3.0]
        .iter()
        .map(|&q| {
            let pq = herm_apply(&p, MatFn::Pow(q)).expect("positive");
            let want = dp.powf(q);
            -(delta(&pq) - want).abs() / want
        })
        .fold(0.0, f64::min);

    let b = ginibre(rng, n, 1.0);
    let prod = d * delta(&b);
    let multiplicative = -(delta(&a.matmul(&b)) - prod)
        .abs()
        .max((delta(&b.matmul(&a)) - prod).abs())
        / prod;

    let mut s = ginibre(rng, n, 1.0);
    if rng.random_range(0..4) == 0 {
        let col = rng.random_range(0..n);
        s.set_column(col, &vec![C64::new(0.0, 0.0); n]);
    }
    let e1 = log_uniform(rng, -8.0, 0.0);
    let e2 = e1 * rng.random::<f64>();
    let (d1, d2, d0) = (
        fk_det(&s, Some(e1)).value,
        fk_det(&s, Some(e2)).value,
        fk_det(&s, None).value,
    );
    let eps_monotone = (d1 - d2).min(d2 - d0);

    (vec![adjoint_abs, monotone, power, multiplicative, eps_monotone], a)
}

/// `(p, q)` pairs of the closed-form suite, in property order.
pub const SZEGO_EXPONENTS: [(f64, f64); 4] = [(2.0, 1.0), (1.0, 1.0), (2.0, 2.0), (1.0, 2.0)];

/// `P = g g^* / Delta(g g^*)`, with `g` either a small perturbation of the
/// identity or a full Ginibre draw; `Delta` from an LU determinant.
fn unit_det_positive(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let g = if rng.random::<bool>() {
        let s = log_uniform(rng, -4.0, -0.5);
        let mut g = ginibre(rng, n, s);
        for i in 0..n {
            g[(i, i)] += 1.0;
        }
        g
    } else {
        ginibre(rng, n, 1.0)
    };
    let log_det = Lu::new(&g).map(|lu| lu.log_abs_det()).unwrap_or(f64::NEG_INFINITY);
    let s = (-2.0 * log_det / n as f64).exp();
    g.mul_adjoint(&g).hermitian_part().scale_real(s)
}

fn szego_closed_form_trial(rng: &mut ChaCha8Rng, n: usize, samples: usize) -> (Vec<f64>, ComplexMatrix) {
    let full = SubdiagonalContext::new(BlockStructure::single(n));
    let h = draw(rng, EnsembleKind::Positive, &full, 1.0);
    let target = delta(&h);
    let objectives: Vec<SzegoObjective> = SZEGO_EXPONENTS
        .iter()
        .map(|&(p, q)| SzegoObjective::new(&h, p, q).expect("positive"))
        .collect();
    let optima: Vec<ComplexMatrix> = objectives
        .iter()
        .map(|o| o.optimal_eigen().expect("definite"))
        .collect();
    let values: Vec<f64> = objectives.iter().zip(&optima).map(|(o, b)| o.eval_eigen(b)).collect();
    let lam = &objectives[0].spectrum().eigenvalues;

    let mut lower = vec![f64::INFINITY; SZEGO_EXPONENTS.len()];
    let mut left_right = objectives
        .iter()
        .zip(&optima)
        .zip(&values)
        .map(|((o, b), v)| -(o.eval_eigen_right(b) - v).abs())
        .fold(0.0, f64::min);
    for sample in 0..samples {
        let pm = unit_det_positive(rng, n);
        for (k, (o, &(p, q))) in objectives.iter().zip(&SZEGO_EXPONENTS).enumerate() {
            // b = c Lambda^{-r/2} P Lambda^{-r/2} has Delta(b) = 1
            let r = q / p;
            let c = o.spectral_det().powf(r);
            let w: Vec<f64> = lam.iter().map(|l| l.powf(-0.5 * r)).collect();
            let bt = ComplexMatrix::from_fn(n, n, |i, j| pm[(i, j)] * (c * w[i] * w[j]));
            lower[k] = lower[k].min(o.eval_eigen(&bt) - values[k]);
            if sample % 100 == 0 {
                left_right = left_right.min(o.eval_eigen_right(&bt) - values[k]);
            }
        }
    }
    let det = -values
        .iter()
        .map(|v| (v - target).abs() / target)
        .fold(0.0, f64::max);
    let mut margins = lower;
    margins.push(det);
    margins.push(left_right);
    (margins, h)
}

fn szego_witness_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let h = draw(rng, EnsembleKind::Positive, ctx, 1.0);
    let fail = || vec![f64::NEG_INFINITY; 5];
    let (value, phi_det, membership) = match szego_infimum(ctx, &h, 2.0, 1.0, SzegoMode::WitnessA) {
        Ok(e) => (
            -e.gap / e.target,
            delta(&ctx.phi(&e.witness).expect("shape")) - 1.0,
            -ctx.membership_distance(&e.witness, Part::A).expect("shape"),
        ),
        Err(_) => return (fail(), h),
    };
    let skk = match skk_degenerate_check(ctx, &h, f64::INFINITY) {
        Ok(e) => -e.gap / e.target,
        Err(_) => f64::NEG_INFINITY,
    };
    let target = delta(&h);
    let bound = match small_delta(ctx, &h) {
        Ok(d) => (d - target) / target,
        Err(_) => f64::NEG_INFINITY,
    };
    (vec![value, phi_det, membership, skk, bound], h)
}

fn jensen_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let a = draw(rng, EnsembleKind::TriangularInA, ctx, 1.0);
    let d = delta(&a);
    let dphi = delta(&ctx.phi(&a).expect("shape"));
    (vec![d - dphi, -rel((d - dphi).abs(), d)], a)
}

fn outer_flag(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        -1.0
    }
}

fn factorize_oracle_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let n = ctx.n();
    let k = ginibre(rng, n, 1.0);
    let kn = k.frobenius_norm();
    let fail = |k: ComplexMatrix| (vec![f64::NEG_INFINITY; 10], k);
    let Ok(f) = beurling_nevanlinna(ctx, &k, Side::Right, DEFAULT_DET_TOL) else {
        return fail(k);
    };
    let Ok((_, r)) = qr_oracle(ctx, &k) else {
        return fail(k);
    };
    let oracle_abs = -abs_op(&f.h).distance(&abs_op(&r)) / kn;
    let unitarity = -f.u.unitarity_defect();
    let reconstruction = -f.residual_reconstruction;

    let (d_unitary, unique) = match d_unitary_between(ctx, &f.h, &r, 1e-7) {
        Ok(Some(u)) => {
            // Phi(h) = u Phi(r) gives the same u by a different route
            let phi_r = ctx.phi(&r).expect("shape");
            let alt = crate::matfun::inverse(&phi_r)
                .map(|inv| ctx.phi(&f.h).expect("shape").matmul(&inv))
                .map(|x| polar_unitary(&x, DEFAULT_RANK_TOL).unitary);
            let unique = match alt {
                Ok(alt) => -alt.distance(&u),
                Err(_) => f64::NEG_INFINITY,
            };
            (0.0, unique)
        }
        _ => (-1.0, f64::NEG_INFINITY),
    };

    let (dh, dphi) = f.outer_certificate;
    let certificate = -(dh - dphi).abs() / dh;
    let agree = match is_outer(ctx, &f.h, 1e-8) {
        Ok(v) => outer_flag(v.agree && v.by_determinant),
        Err(_) => -1.0,
    };

    let left = match beurling_nevanlinna(ctx, &k, Side::Left, DEFAULT_DET_TOL) {
        Ok(l) => {
            let adj = ctx.adjoint();
            let outer_star = is_outer(&adj, &l.h.adjoint(), 1e-8)
                .map(|v| v.by_determinant && v.by_inverse)
                .unwrap_or(false);
            let res = -l.residual_reconstruction.max(l.u.unitarity_defect());
            if outer_star {
                res
            } else {
                f64::NEG_INFINITY
            }
        }
        Err(_) => f64::NEG_INFINITY,
    };

    let k2 = ginibre(rng, n, 1.0);
    let product = match beurling_nevanlinna(ctx, &k2, Side::Right, DEFAULT_DET_TOL) {
        Ok(f2) => match is_outer(ctx, &f.h.matmul(&f2.h), 1e-8) {
            Ok(v) => outer_flag(v.by_determinant && v.by_inverse),
            Err(_) => -1.0,
        },
        Err(_) => -1.0,
    };

    let s = fk_det(&k, None).singular_values;
    let support = outer_flag(s.last().is_some_and(|&x| x > 0.0));

    (
        vec![
            oracle_abs,
            unitarity,
            reconstruction,
            d_unitary,
            unique,
            certificate,
            agree,
            left,
            product,
            support,
        ],
        k,
    )
}

fn factorize_internals_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let n = ctx.n();
    let k = ginibre(rng, n, 1.0);
    let kn2 = k.frobenius_norm_sqr();
    let Ok((v, diag)) = project_onto_ka0(ctx, &k) else {
        return (vec![f64::NEG_INFINITY; 4], k);
    };
    let kv = k.sub_ref(&v);
    let polar = polar_unitary(&kv, DEFAULT_RANK_TOL);
    let h = polar.unitary.adjoint_mul(&k);
    let phi_of_h = -ctx.phi(&h).expect("shape").distance(&polar.modulus);
    let dk = delta(&k);
    let chain = -(dk - delta(&kv)).abs() / dk;
    (vec![-diag.off_block_mass / kn2, diag.det_excess, phi_of_h, chain], k)
}

/// Random `h in A`; half the time one column inside a diagonal block is
/// zeroed so that `h` and `Phi(h)` are exactly singular.
fn mixed_in_a(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> ComplexMatrix {
    let n = ctx.n();
    let mut h = draw(rng, EnsembleKind::TriangularInA, ctx, 1.0);
    if rng.random::<bool>() {
        let col = rng.random_range(0..n);
        h.set_column(col, &vec![C64::new(0.0, 0.0); n]);
    }
    h
}

fn outer_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let h = mixed_in_a(rng, ctx);
    let tol = 1e-8;
    let Ok(v) = is_outer(ctx, &h, tol) else {
        return (vec![-1.0, -1.0], h);
    };
    let tona = match tona_check(ctx, &h, tol) {
        Ok(t) => outer_flag(t.verdict == v.by_determinant),
        Err(_) => -1.0,
    };
    (vec![outer_flag(v.agree), tona], h)
}

fn riesz_trial(rng: &mut ChaCha8Rng, ctx: &SubdiagonalContext) -> (Vec<f64>, ComplexMatrix) {
    let n = ctx.n();
    let f = ginibre(rng, n, 1.0);
    let fnorm = f.frobenius_norm();
    let (residual, det) = match riesz_refinement(ctx, &f) {
        Ok(r) => {
            let want = delta(&f).powf(-0.5);
            let dd = delta(&r.d);
            (-r.residual / fnorm, -(dd - want).abs() / dd)
        }
        Err(_) => (f64::NEG_INFINITY, f64::NEG_INFINITY),
    };
    let fa = draw(rng, EnsembleKind::TriangularInA, ctx, 1.0);
    let phi_h1 = match riesz_refinement(ctx, &fa) {
        Ok(r) => -ctx.phi(&r.h1).expect("shape").frobenius_norm() / (1.0 + fa.frobenius_norm()),
        Err(_) => f64::NEG_INFINITY,
    };

    let g = draw(rng, EnsembleKind::Positive, ctx, 1.0);
    let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
    let (modulus, lift_det, lift_outer) = match riesz_szego_lift(ctx, &g, p) {
        Ok(h) => {
            let hp = herm_apply(&abs_op(&h), MatFn::Pow(p)).expect("positive");
            let dg = delta(&g);
            let outer = is_outer(ctx, &h, 1e-8)
                .map(|v| v.by_determinant && v.by_inverse)
                .unwrap_or(false);
            (
                -hp.distance(&g) / g.frobenius_norm(),
                -(delta(&h).powf(p) - dg).abs() / dg,
                outer_flag(outer),
            )
        }
        Err(_) => (f64::NEG_INFINITY, f64::NEG_INFINITY, -1.0),
    };
    (vec![residual, det, phi_h1, modulus, lift_det, lift_outer], f)
}

/// Coefficients `a_1, b_1, ..., a_K, b_K` of a band-limited log-modulus.
fn smooth_log_coefficients(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let terms = rng.random_range(1..=8usize);
    (0..2 * terms)
        .map(|i| rng.sample::<f64, _>(StandardNormal) * 0.6 / (i / 2 + 1) as f64)
        .collect()
}

fn circle_trial(rng: &mut ChaCha8Rng, grid: usize) -> (Vec<f64>, ComplexMatrix) {
    let coeffs = smooth_log_coefficients(rng);
    let f = smooth_positive(&coeffs, grid);
    let input = ComplexMatrix::from_fn(1, coeffs.len(), |_, j| C64::new(coeffs[j], 0.0));
    let fail = |input| (vec![f64::NEG_INFINITY; 6], input);
    let Ok(h) = circle::outer_part(&f) else {
        return fail(input);
    };
    let fmax = f.modulus().iter().copied().fold(0.0, f64::max);
    let roundtrip = -h
        .modulus()
        .iter()
        .zip(f.modulus())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / fmax;
    let df = circle::circle_delta(&f);
    let dh = circle::circle_delta(&h);
    let preserved = -(dh - df).abs() / df;
    let c = h.coefficients();
    let criterion = -(c[0].norm() - dh).abs() / dh;
    let norm2 = (h.samples().iter().map(|z| z.norm_sqr()).sum::<f64>() / grid as f64).sqrt();
    let negative = c[grid / 2 + 1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let analytic = -negative / norm2;

    let w = CircleFunction::new(f.samples().iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect())
        .expect("grid");
    let d = rng.random_range(0..64usize);
    let monotone = match (circle::circle_szego_inf(&w, d), circle::circle_szego_inf(&w, d + 1)) {
        (Ok(a), Ok(b)) => a - b,
        _ => f64::NEG_INFINITY,
    };

    let fine = smooth_positive(&coeffs, 2 * grid);
    let aliasing = -(circle::circle_delta(&fine) - df).abs() / df;
    (vec![roundtrip, preserved, criterion, analytic, monotone, aliasing], input)
}

/// `exp(sum_k a_k cos kt + b_k sin kt)` on a grid of `grid` points.
pub fn smooth_positive(coeffs: &[f64], grid: usize) -> CircleFunction {
    CircleFunction::from_fn(grid, |t| {
        let mut s = 0.0;
        for k in 0..coeffs.len() / 2 {
            let kt = (k + 1) as f64 * t;
            s += coeffs[2 * k] * kt.cos() + coeffs[2 * k + 1] * kt.sin();
        }
        C64::new(s.exp(), 0.0)
    })
    .expect("power of two")
}

/// `tau(exp(Phi(log|a|))) - tau(|Phi(a)|)` for invertible `a`, `None` when
/// `log|a|` does not exist.
pub fn phi_jensen_margin(ctx: &SubdiagonalContext, a: &ComplexMatrix) -> Option<f64> {
    let l = log_abs(a)?;
    let pinched = ctx.phi(&l).ok()?;
    let lhs = herm_apply(&pinched, MatFn::Exp).ok()?.normalized_trace().re;
    let rhs = abs_op(&ctx.phi(a).ok()?).normalized_trace().re;
    Some(lhs - rhs)
}

/// Scan of `tau(exp(Phi(log|a|))) >= tau(|Phi(a)|)` over random invertible
/// `a in A`. Samples without `log|a|` are skipped and counted; margins below
/// `-tolerance` are reported as counterexamples.
pub fn conjecture_scan(
    n: usize,
    blocks: &BlockStructure,
    trials: usize,
    seed: u64,
    tolerance: f64,
    exec: &dyn TrialMap,
) -> Result<CampaignReport, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::ConfigError("trials must be positive".to_string()));
    }
    if blocks.n() != n {
        return Err(HarnessError::ConfigError("block sizes must sum to n".to_string()));
    }
    let ctx = SubdiagonalContext::new(blocks.clone());
    let results = exec.map_trials(trials, &|i| scan_trial(&ctx, trial_seed(seed, i)));
    let mut report = CampaignReport {
        trials,
        skipped: 0,
        property_results: Vec::new(),
        counterexamples: Vec::new(),
        block_structures: Vec::new(),
        wall_time: 0.0,
    };
    aggregate(&mut report, &[("conjecture.phi_jensen", tolerance)], &results, seed);
    Ok(report)
}

/// One scan sample from its seed.
pub fn scan_trial(ctx: &SubdiagonalContext, seed: u64) -> Trial {
    let mut rng = trial_rng(seed, 0);
    let a = draw(&mut rng, EnsembleKind::TriangularInA, ctx, 1.0);
    let margin = phi_jensen_margin(ctx, &a);
    Trial {
        margins: vec![margin.unwrap_or(0.0)],
        input: a,
        blocks: ctx.blocks().sizes().to_vec(),
        skipped: margin.is_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: EnsembleKind, sizes: &[usize], seed: u64) -> EnsembleSpec {
        let blocks = BlockStructure::new(sizes.to_vec()).unwrap();
        EnsembleSpec {
            kind,
            n: blocks.n(),
            blocks,
            seed,
            scale: 1.0,
        }
    }

    #[test]
    fn ensembles_are_deterministic() {
        let s = spec(EnsembleKind::Ginibre, &[2, 2], 7);
        assert_eq!(random_ensemble(&s).unwrap(), random_ensemble(&s).unwrap());
        let t = spec(EnsembleKind::Ginibre, &[2, 2], 8);
        assert_ne!(random_ensemble(&s).unwrap(), random_ensemble(&t).unwrap());
    }

    #[test]
    fn ensemble_kinds_have_their_structure() {
        let s = spec(EnsembleKind::TriangularInA, &[1, 2, 1], 3);
        let ctx = SubdiagonalContext::new(s.blocks.clone());
        let a = random_ensemble(&s).unwrap();
        assert_eq!(ctx.membership_distance(&a, Part::A).unwrap(), 0.0);
        let d = random_ensemble(&spec(EnsembleKind::InD, &[1, 2, 1], 3)).unwrap();
        assert_eq!(ctx.membership_distance(&d, Part::D).unwrap(), 0.0);
        let p = random_ensemble(&spec(EnsembleKind::Positive, &[4], 3)).unwrap();
        assert!(HermitianSpectrum::new(&p).unwrap().min() > 0.0);
        let u = random_ensemble(&spec(EnsembleKind::Unitary, &[4], 3)).unwrap();
        assert!(u.unitarity_defect() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(EnsembleKind::Ginibre, &[2], 0);
        s.n = 3;
        assert!(matches!(random_ensemble(&s), Err(HarnessError::InvalidSpec(_))));
        let mut s = spec(EnsembleKind::Ginibre, &[2], 0);
        s.scale = 0.0;
        assert!(random_ensemble(&s).is_err());
    }

    #[test]
    fn fkdet_smoke_campaign() {
        let config = CampaignConfig {
            suites: vec![Suite::Fkdet],
            trials: 100,
            seed: 11,
            ..CampaignConfig::default()
        };
        let r = campaign(&config, &Sequential).unwrap();
        assert_eq!(r.property_results.len(), 5);
        assert!(r.passed(), "{:?}", r.property_results);
        for p in &r.property_results {
            let t = replay(Suite::Fkdet, &config, p.worst_seed);
            let idx = Suite::Fkdet.properties().iter().position(|x| x.0 == p.name).unwrap();
            assert!((t.margins[idx] - p.worst_margin).abs() <= 1e-12);
        }
    }

    #[test]
    fn scan_trivial_cases() {
        let ctx = SubdiagonalContext::new(BlockStructure::singletons(3));
        assert_eq!(phi_jensen_margin(&ctx, &ComplexMatrix::identity(3)), Some(0.0));
        let d = ComplexMatrix::from_real_diag(&[2.0, 0.5, 3.0]);
        assert!(phi_jensen_margin(&ctx, &d).unwrap().abs() < 1e-12);
        assert_eq!(phi_jensen_margin(&ctx, &ComplexMatrix::unit(3, 0, 1)), None);
    }

    #[test]
    fn bad_configs() {
        let c = CampaignConfig {
            n_min: 5,
            n_max: 3,
            ..CampaignConfig::default()
        };
        assert!(matches!(campaign(&c, &Sequential), Err(HarnessError::ConfigError(_))));
        assert!(suites_for("szego").unwrap().len() == 3);
        assert!(suites_for("nope").is_none());
    }
}
