//! Subcommands. Every command writes a report; the exit code is 0 on
//! success, 1 when a checked invariant fails or a counterexample turns up,
//! and 2 for usage and input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use subdiag_core::algebra::{BlockStructure, Part, SubdiagonalContext};
use subdiag_core::circle::{circle_delta, circle_szego_inf, outer_part, CircleFunction};
use subdiag_core::factorize::{
    beurling_nevanlinna, is_outer, riesz_refinement, riesz_szego_lift, FactorizeError, Side,
    DEFAULT_DET_TOL,
};
use subdiag_core::fkdet::{delta, fk_det};
use subdiag_core::harness::{
    campaign, conjecture_scan, suites_for, CampaignConfig, CampaignReport, Sequential, TrialMap,
};
use subdiag_core::matfun::{abs_op, herm_apply, MatFn};
use subdiag_core::matrix::ComplexMatrix;
use subdiag_core::szego::{szego_infimum, tona_check, SzegoError, SzegoMode};

use crate::files::{load_circle, load_matrix, matrix_rows, FileError, ReportFile};
use crate::parallel::RayonExecutor;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SEED_ENV: &str = "SUBDIAG_SEED";

#[derive(Parser, Debug)]
#[command(name = "subdiag", version, about = "Determinants, Szegő infima and factorizations in block upper triangular algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    /// Input file.
    #[arg(short = 'i', long = "in")]
    input: PathBuf,
    /// Report destination; stdout when omitted.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
    /// Block sizes overriding the ones in the input, e.g. `1,2,1`.
    #[arg(long, value_delimiter = ',')]
    blocks: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct Out {
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    ClosedForm,
    WitnessA,
    SearchD,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SideArg {
    Right,
    Left,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuglede-Kadison determinant.
    Det {
        #[command(flatten)]
        io: Io,
        /// Regularization `exp tau(log(|a| + eps))`.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Conditional expectation onto the block diagonal.
    Phi {
        #[command(flatten)]
        io: Io,
    },
    /// Szegő infimum of a positive matrix.
    Szego {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_enum, default_value = "closed-form")]
        mode: ModeArg,
        /// Relative tolerance on the value against the determinant.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Unitary times outer factorization.
    Factor {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "right")]
        side: SideArg,
        #[arg(long, default_value_t = DEFAULT_DET_TOL)]
        tol: f64,
    },
    /// Outer test by determinant, by inverse and by wandering subspace.
    OuterCheck {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Refinement `f = (f - h1) d h2` with `h2` outer.
    Riesz {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Outer `h` with `|h|^p = f` for positive `f`.
    Lift {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Outer function with the modulus of sampled circle data.
    CircleOuter {
        #[arg(short = 'i', long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Prediction error of a sampled weight against polynomials of a degree.
    CircleSzego {
        #[arg(short = 'i', long = "in")]
        input: PathBuf,
        #[command(flatten)]
        out: Out,
        #[arg(long, default_value_t = 32)]
        degree: usize,
    },
    /// Scan of `tau(exp(Phi(log|a|))) >= tau(|Phi(a)|)` over random `a in A`.
    Scan {
        #[arg(long)]
        n: usize,
        /// Defaults to singletons.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
    /// Property campaign over the library.
    Campaign {
        /// Modules or suites, comma separated; `all` by default.
        #[arg(long, value_delimiter = ',', default_value = "all")]
        modules: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest dimension.
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        /// Feasible points per trial in the Szegő closed-form suite.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: Out,
    },
}

/// A command failure carrying its exit code and, when the failure is a
/// finding rather than bad input, the report to write anyway.
struct Failure {
    code: i32,
    message: String,
    report: Option<Box<ReportFile>>,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
            report: None,
        }
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Failure::usage(e)
    }
}

type Outcome = Result<(ReportFile, i32), Failure>;

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. Reports go to `--out` or stdout, diagnostics to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = match &cli.command {
        Command::Det { io, .. }
        | Command::Phi { io }
        | Command::Szego { io, .. }
        | Command::Factor { io, .. }
        | Command::OuterCheck { io, .. }
        | Command::Riesz { io, .. }
        | Command::Lift { io, .. } => io.out.clone(),
        Command::CircleOuter { out, .. }
        | Command::CircleSzego { out, .. }
        | Command::Scan { out, .. }
        | Command::Campaign { out, .. } => out.out.clone(),
    };
    let (report, code) = match dispatch(cli.command) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {}", f.message);
            match f.report {
                Some(r) => (*r, f.code),
                None => return f.code,
            }
        }
    };
    if let Err(e) = report.write(out.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    code
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Det { io, eps } => det(&io, eps),
        Command::Phi { io } => phi(&io),
        Command::Szego { io, p, q, mode, tol } => szego(&io, p, q, mode, tol),
        Command::Factor { io, side, tol } => factor(&io, side, tol),
        Command::OuterCheck { io, tol } => outer_check(&io, tol),
        Command::Riesz { io, tol } => riesz(&io, tol),
        Command::Lift { io, p, tol } => lift(&io, p, tol),
        Command::CircleOuter { input, tol, .. } => circle_outer(&input, tol),
        Command::CircleSzego { input, degree, .. } => circle_szego(&input, degree),
        Command::Scan {
            n,
            blocks,
            trials,
            seed,
            tol,
            threads,
            ..
        } => scan(n, blocks, trials, resolve_seed(seed)?, tol, threads),
        Command::Campaign {
            modules,
            trials,
            seed,
            n,
            n_min,
            samples,
            threads,
            ..
        } => run_campaign(&modules, trials, resolve_seed(seed)?, n_min, n, samples, threads),
    }
}

/// `--seed`, else `SUBDIAG_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn load(io: &Io) -> Result<(SubdiagonalContext, ComplexMatrix, Value), Failure> {
    let (mut ctx, a) = load_matrix(&io.input)?;
    if let Some(sizes) = &io.blocks {
        let blocks = BlockStructure::new(sizes.clone()).map_err(Failure::usage)?;
        if blocks.n() != a.rows() {
            return Err(Failure::usage(format!(
                "--blocks sum to {}, matrix has n = {}",
                blocks.n(),
                a.rows()
            )));
        }
        ctx = SubdiagonalContext::new(blocks);
    }
    let inputs = json!({
        "input": io.input.display().to_string(),
        "n": a.rows(),
        "blocks": ctx.blocks().sizes(),
    });
    Ok((ctx, a, inputs))
}

fn with_param(mut inputs: Value, key: &str, value: Value) -> Value {
    inputs[key] = value;
    inputs
}

fn verdict(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn det(io: &Io, eps: Option<f64>) -> Outcome {
    if eps.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
        return Err(Failure::usage("--eps must be a nonnegative number"));
    }
    let (_, a, inputs) = load(io)?;
    let r = fk_det(&a, eps);
    let mut report = ReportFile::new("det", with_param(inputs, "eps", json!(eps)), 0);
    report.results = json!({
        "value": r.value,
        "log_value": r.log_value,
        "singular_values": r.singular_values,
    });
    Ok((report, EXIT_OK))
}

fn phi(io: &Io) -> Outcome {
    let (ctx, a, inputs) = load(io)?;
    let p = ctx.phi(&a).map_err(Failure::usage)?;
    let t = ctx.tau(&a);
    let mut report = ReportFile::new("phi", inputs, 0);
    report.results = json!({
        "phi": matrix_rows(&p),
        "tau": [t.re, t.im],
        "distance_to_a": ctx.membership_distance(&a, Part::A).map_err(Failure::usage)?,
    });
    let tp = ctx.tau(&p);
    let gap = (tp - t).norm();
    report.margins.insert("trace_preserved".into(), -gap);
    Ok((report, verdict(gap <= 1e-12 * (1.0 + a.frobenius_norm()))))
}

fn szego(io: &Io, p: f64, q: f64, mode: ModeArg, tol: Option<f64>) -> Outcome {
    let (ctx, h, inputs) = load(io)?;
    let mode = match mode {
        ModeArg::ClosedForm => SzegoMode::ClosedForm,
        ModeArg::WitnessA => SzegoMode::WitnessA,
        ModeArg::SearchD => SzegoMode::SearchD,
    };
    let tol = tol.unwrap_or(match mode {
        SzegoMode::ClosedForm => 1e-10,
        _ => 1e-6,
    });
    let inputs = json!({ "matrix": inputs, "p": p, "q": q, "mode": format!("{mode:?}"), "tol": tol });
    let est = szego_infimum(&ctx, &h, p, q, mode).map_err(|e| match e {
        SzegoError::Mismatch { .. } => Failure {
            code: EXIT_VIOLATION,
            message: e.to_string(),
            report: None,
        },
        other => Failure::usage(other),
    })?;
    let mut report = ReportFile::new("szego", inputs, 0);
    let rel = est.gap / est.target;
    report.results = json!({
        "value": est.value,
        "target": est.target,
        "gap": est.gap,
        "converged": est.converged,
        "witness": matrix_rows(&est.witness),
    });
    // the search stays inside D and only bounds the infimum from above
    let ok = match mode {
        SzegoMode::SearchD => est.value >= est.target * (1.0 - tol),
        _ => rel <= tol,
    };
    report.margins.insert("relative_gap".into(), -rel);
    Ok((report, verdict(ok)))
}

fn factor(io: &Io, side: SideArg, tol: f64) -> Outcome {
    let (ctx, k, inputs) = load(io)?;
    let side = match side {
        SideArg::Right => Side::Right,
        SideArg::Left => Side::Left,
    };
    let inputs = json!({ "matrix": inputs, "side": format!("{side:?}"), "tol": tol });
    let mut report = ReportFile::new("factor", inputs, 0);
    match beurling_nevanlinna(&ctx, &k, side, tol) {
        Ok(f) => {
            let kn = k.frobenius_norm();
            let rec = f.residual_reconstruction / (1.0 + kn);
            let unit = f.u.unitarity_defect();
            report.results = json!({
                "u": matrix_rows(&f.u),
                "h": matrix_rows(&f.h),
                "residual_reconstruction": f.residual_reconstruction,
                "residual_membership": f.residual_membership,
                "det": f.outer_certificate.0,
                "det_phi": f.outer_certificate.1,
            });
            report.margins.insert("reconstruction".into(), -rec);
            report.margins.insert("unitarity".into(), -unit);
            Ok((report, verdict(rec <= 1e-8 && unit <= 1e-9)))
        }
        Err(e) => {
            let kind = match &e {
                FactorizeError::DeterminantZero { .. } => "DeterminantZero",
                FactorizeError::MembershipFailure { .. } => "MembershipFailure",
                _ => "NumericalFailure",
            };
            report.results = json!({ "error": kind, "message": e.to_string() });
            Err(Failure {
                code: EXIT_VIOLATION,
                message: e.to_string(),
                report: Some(Box::new(report)),
            })
        }
    }
}

fn outer_check(io: &Io, tol: f64) -> Outcome {
    let (ctx, h, inputs) = load(io)?;
    let v = is_outer(&ctx, &h, tol).map_err(Failure::usage)?;
    let t = tona_check(&ctx, &h, tol).map_err(Failure::usage)?;
    let mut report = ReportFile::new("outer-check", with_param(inputs, "tol", json!(tol)), 0);
    report.results = json!({
        "outer": v.by_determinant && v.by_inverse,
        "by_determinant": v.by_determinant,
        "by_inverse": v.by_inverse,
        "by_wandering_subspace": t.verdict,
        "det": v.det,
        "det_phi": v.det_phi,
        "phi_norm_sqr": t.phi_norm_sqr,
        "infimum": t.infimum,
    });
    let ok = v.agree && t.verdict == v.by_determinant;
    Ok((report, verdict(ok)))
}

fn riesz(io: &Io, tol: f64) -> Outcome {
    let (ctx, f, inputs) = load(io)?;
    let mut report = ReportFile::new("riesz", with_param(inputs, "tol", json!(tol)), 0);
    let r = riesz_refinement(&ctx, &f).map_err(|e| Failure {
        code: EXIT_VIOLATION,
        message: e.to_string(),
        report: None,
    })?;
    let residual = r.residual / (1.0 + f.frobenius_norm());
    let want = delta(&f).powf(-0.5);
    let dd = delta(&r.d);
    let det_gap = (dd - want).abs() / dd;
    report.results = json!({
        "h1": matrix_rows(&r.h1),
        "d": matrix_rows(&r.d),
        "h2": matrix_rows(&r.h2),
        "residual": r.residual,
        "det_d": dd,
    });
    report.margins.insert("reconstruction".into(), -residual);
    report.margins.insert("det_d".into(), -det_gap);
    Ok((report, verdict(residual <= tol && det_gap <= tol)))
}

fn lift(io: &Io, p: f64, tol: f64) -> Outcome {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Failure::usage("--p must be a finite number >= 1"));
    }
    let (ctx, f, inputs) = load(io)?;
    let inputs = json!({ "matrix": inputs, "p": p, "tol": tol });
    let h = riesz_szego_lift(&ctx, &f, p).map_err(|e| match e {
        FactorizeError::Matrix(_) => Failure::usage(format!("input must be positive: {e}")),
        other => Failure {
            code: EXIT_VIOLATION,
            message: other.to_string(),
            report: None,
        },
    })?;
    let hp = herm_apply(&abs_op(&h), MatFn::Pow(p)).map_err(Failure::usage)?;
    let modulus = hp.distance(&f) / f.frobenius_norm();
    let df = delta(&f);
    let det_gap = (delta(&h).powf(p) - df).abs() / df;
    let mut report = ReportFile::new("lift", inputs, 0);
    report.results = json!({ "h": matrix_rows(&h), "det": delta(&h) });
    report.margins.insert("modulus".into(), -modulus);
    report.margins.insert("det".into(), -det_gap);
    Ok((report, verdict(modulus <= tol && det_gap <= tol)))
}

fn circle_input(path: &Path) -> Result<(CircleFunction, Value), Failure> {
    let f = load_circle(path)?;
    let inputs = json!({ "input": path.display().to_string(), "samples": f.len() });
    Ok((f, inputs))
}

fn circle_outer(path: &Path, tol: f64) -> Outcome {
    let (f, inputs) = circle_input(path)?;
    let h = outer_part(&f).map_err(Failure::usage)?;
    let df = circle_delta(&f);
    let c0 = h.coefficients()[0];
    let gap = (c0.norm() - df).abs() / df;
    let mut report = ReportFile::new("circle-outer", with_param(inputs, "tol", json!(tol)), 0);
    report.results = json!({
        "samples": h.samples().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "delta": df,
        "mean": [c0.re, c0.im],
    });
    report.margins.insert("mean_modulus".into(), -gap);
    Ok((report, verdict(gap <= tol)))
}

fn circle_szego(path: &Path, degree: usize) -> Outcome {
    let (f, inputs) = circle_input(path)?;
    let value = circle_szego_inf(&f, degree).map_err(Failure::usage)?;
    let mut report = ReportFile::new("circle-szego", with_param(inputs, "degree", json!(degree)), 0);
    report.results = json!({ "value": value, "delta": circle_delta(&f) });
    Ok((report, EXIT_OK))
}

fn executor(threads: Option<usize>) -> Result<Box<dyn TrialMap>, Failure> {
    match threads {
        Some(0) => Err(Failure::usage("--threads must be positive")),
        Some(1) => Ok(Box::new(Sequential)),
        Some(t) => Ok(Box::new(RayonExecutor::with_threads(t).map_err(Failure::usage)?)),
        None => Ok(Box::new(RayonExecutor::new())),
    }
}

fn campaign_results(r: &CampaignReport) -> Value {
    json!({
        "trials": r.trials,
        "skipped": r.skipped,
        "wall_time": r.wall_time,
        "passed": r.passed(),
        "block_structures": r.block_structures,
        "properties": r.property_results.iter().map(|p| json!({
            "name": p.name,
            "tolerance": p.tolerance,
            "worst_margin": p.worst_margin,
            "worst_seed": p.worst_seed,
            "pass": p.pass,
        })).collect::<Vec<_>>(),
        "counterexamples": r.counterexamples.iter().map(|c| json!({
            "property": c.property,
            "seed": c.seed,
            "margin": c.margin,
            "blocks": c.blocks,
            "input": matrix_rows(&c.input),
        })).collect::<Vec<_>>(),
    })
}

fn scan(
    n: usize,
    blocks: Option<Vec<usize>>,
    trials: usize,
    seed: u64,
    tol: f64,
    threads: Option<usize>,
) -> Outcome {
    if n == 0 {
        return Err(Failure::usage("--n must be positive"));
    }
    let blocks = match blocks {
        Some(b) => BlockStructure::new(b).map_err(Failure::usage)?,
        None => BlockStructure::singletons(n),
    };
    let exec = executor(threads)?;
    let start = Instant::now();
    let mut r = conjecture_scan(n, &blocks, trials, seed, tol, exec.as_ref()).map_err(Failure::usage)?;
    r.wall_time = start.elapsed().as_secs_f64();
    let inputs = json!({ "n": n, "blocks": blocks.sizes(), "trials": trials, "tol": tol });
    let mut report = ReportFile::new("scan", inputs, seed);
    let worst = &r.property_results[0];
    let mut results = campaign_results(&r);
    results["min_margin"] = json!(worst.worst_margin);
    results["worst_seed"] = json!(worst.worst_seed);
    report.results = results;
    report.margins.insert(worst.name.clone(), worst.worst_margin);
    let code = verdict(r.counterexamples.is_empty());
    Ok((report, code))
}

fn run_campaign(
    modules: &[String],
    trials: usize,
    seed: u64,
    n_min: usize,
    n_max: usize,
    samples: usize,
    threads: Option<usize>,
) -> Outcome {
    let mut suites = Vec::new();
    for m in modules {
        let s = suites_for(m).ok_or_else(|| Failure::usage(format!("unknown module {m:?}")))?;
        for x in s {
            if !suites.contains(&x) {
                suites.push(x);
            }
        }
    }
    let config = CampaignConfig {
        suites,
        n_min,
        n_max,
        trials,
        seed,
        szego_samples: samples,
        ..CampaignConfig::default()
    };
    let exec = executor(threads)?;
    let start = Instant::now();
    let mut r = campaign(&config, exec.as_ref()).map_err(Failure::usage)?;
    r.wall_time = start.elapsed().as_secs_f64();
    let inputs = json!({
        "modules": modules,
        "trials": trials,
        "n_min": n_min,
        "n_max": n_max,
        "samples": samples,
    });
    let mut report = ReportFile::new("campaign", inputs, seed);
    report.results = campaign_results(&r);
    for p in &r.property_results {
        report.margins.insert(p.name.clone(), p.worst_margin);
    }
    Ok((report, verdict(r.passed())))
}
