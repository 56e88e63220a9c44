//! The subcommands. Each returns its results and checks; errors become
//! error reports in [`run`].

use crate::error::CliError;
use crate::format::{complex, complexes, mixed, multi_index, num, rationals, real};
use crate::problem::{read_problem, DeltaChoice, ProblemFile};
use crate::report::{assumption_json, Check, Report};
use gkz_core::cycles::{is_resonant, CycleSpec, Winding};
use gkz_core::exact_lattice::basis_data;
use gkz_core::geometry::{geometry_report, validate_assumption_b};
use gkz_core::numerics::QuadratureConfig;
use gkz_core::solver::{
    connection_solve, continue_f, continue_f_with, convergence_status, eval_a0, eval_f, eval_h_upsilon,
    expansion_report, gevrey_table, multi_indices_of_degree, pole_and_resonance, residual_suite,
    taylor_coefficient, ContinuationOptions, ConvergenceMode, EvalResult, PivotRule, ReducedCoordinates,
    SeriesTable, SolverConfig, ToricProblem, DEFAULT_FD_STEP,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Smallest connection determinant accepted as invertible.
pub const CONNECTION_DET_MIN: f64 = 1e-6;
/// Floor on the derivative-residual threshold: central differences with the
/// default step carry an `O(h^2)` truncation error.
pub const FD_TOL_FLOOR: f64 = 1e-6;
/// Highest total degree compared in the connection suite.
pub const RECONSTRUCTION_DEGREE: u64 = 4;
/// Bound handed to the pole predicate.
const POLE_BOUND: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Check,
    Basis,
    Eval,
    Expand,
    Verify,
    Hankel,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Basis => "basis",
            Command::Eval => "eval",
            Command::Expand => "expand",
            Command::Verify => "verify",
            Command::Hankel => "hankel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    All,
    Gamma,
    Contiguity,
    Continuation,
    Connection,
    Hankel,
    Expansion,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Gamma => "gamma",
            Suite::Contiguity => "contiguity",
            Suite::Continuation => "continuation",
            Suite::Connection => "connection",
            Suite::Hankel => "hankel",
            Suite::Expansion => "expansion",
        }
    }

    fn members(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Gamma, Suite::Contiguity, Suite::Continuation, Suite::Connection, Suite::Hankel],
            s => vec![s],
        }
    }
}

/// Command-line settings; `None` defers to the problem file, then to defaults.
#[derive(Clone, Debug)]
pub struct Flags {
    pub order: u64,
    pub tol: f64,
    pub epsilon: Option<f64>,
    pub mode: ConvergenceMode,
    pub p: Option<Vec<i64>>,
    pub delta: Option<DeltaChoice>,
    pub suite: Suite,
    pub all_reps: bool,
    pub jobs: Option<usize>,
    pub deterministic: bool,
    pub csv: Option<PathBuf>,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            order: 6,
            tol: 1e-8,
            epsilon: None,
            mode: ConvergenceMode::Certified,
            p: None,
            delta: None,
            suite: Suite::All,
            all_reps: false,
            jobs: None,
            deterministic: false,
            csv: None,
        }
    }
}

pub const DEFAULT_EPSILON: f64 = 0.1;

struct Context {
    tp: ToricProblem,
    rc: ReducedCoordinates,
    cfg: SolverConfig,
    p: Vec<i64>,
    delta: DeltaChoice,
    epsilon: f64,
    flags: Flags,
}

impl Context {
    fn spec(&self, p: &[i64]) -> Result<CycleSpec, CliError> {
        Ok(match &self.delta {
            DeltaChoice::Auto => self.tp.auto_spec(p.to_vec())?,
            DeltaChoice::Values(v) => self.tp.spec_with(p.to_vec(), v.clone())?,
        })
    }

    fn beta(&self) -> &[Complex64] {
        &self.rc.beta
    }

    fn y(&self) -> &[Complex64] {
        &self.rc.y
    }

    /// Maps `f` over `items`, on a pool of `--jobs` threads unless
    /// `--deterministic` asks for a serial run. Output order follows input order.
    fn map<T, U, F>(&self, items: &[T], f: F) -> Result<Vec<U>, CliError>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> Result<U, CliError> + Sync + Send,
    {
        if self.flags.deterministic || items.len() < 2 {
            return items.iter().map(f).collect();
        }
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.flags.jobs {
            builder = builder.num_threads(n);
        }
        let pool = builder
            .build()
            .map_err(|e| CliError::parse("--jobs", e))?;
        pool.install(|| items.par_iter().map(&f).collect())
    }
}

fn build_context(file: &ProblemFile, flags: &Flags) -> Result<Context, CliError> {
    let tp = file.to_problem()?;
    let settings = file.settings()?;
    let rc = tp.reduce()?;
    let d = rc.rp.d();
    let mut quad = QuadratureConfig::default();
    if let Some(t) = settings.rel_tol {
        quad = quad.with_rel_tol(t);
    }
    if let Some(t) = settings.abs_tol {
        quad = quad.with_abs_tol(t);
    }
    if let Some(n) = settings.max_levels {
        quad.max_levels = n;
    }
    let quad = quad.with_env_overrides();
    quad.validate()?;
    let cfg = SolverConfig::default().with_quad(quad).with_mode(flags.mode);
    let p = flags.p.clone().or(settings.p).unwrap_or_else(|| vec![0; d]);
    if p.len() != d {
        return Err(CliError::parse("p", format!("expected {d} entries, got {}", p.len())));
    }
    let delta = flags.delta.clone().or(settings.delta).unwrap_or(DeltaChoice::Auto);
    if let DeltaChoice::Values(v) = &delta {
        if v.len() != d {
            return Err(CliError::parse("delta", format!("expected {d} entries, got {}", v.len())));
        }
    }
    let epsilon = flags.epsilon.or(settings.epsilon).unwrap_or(DEFAULT_EPSILON);
    if !(epsilon > 0.0) {
        return Err(CliError::parse("epsilon", format!("must be positive, got {epsilon}")));
    }
    Ok(Context {
        tp,
        rc,
        cfg,
        p,
        delta,
        epsilon,
        flags: flags.clone(),
    })
}

fn inputs_json(path: &Path, file: Option<&ProblemFile>, flags: &Flags, command: Command) -> Value {
    let delta = match &flags.delta {
        None => Value::Null,
        Some(DeltaChoice::Auto) => json!("auto"),
        Some(DeltaChoice::Values(v)) => Value::Array(v.iter().map(mixed).collect()),
    };
    let mut f = serde_json::Map::new();
    f.insert("order".into(), json!(flags.order));
    f.insert("tol".into(), real(flags.tol));
    f.insert("epsilon".into(), flags.epsilon.map(real).unwrap_or(Value::Null));
    f.insert(
        "mode".into(),
        json!(match flags.mode {
            ConvergenceMode::Certified => "certified",
            ConvergenceMode::Extended => "extended",
        }),
    );
    f.insert("p".into(), json!(flags.p));
    f.insert("delta".into(), delta);
    if command == Command::Verify {
        f.insert("suite".into(), json!(flags.suite.name()));
    }
    if command == Command::Eval {
        f.insert("all_reps".into(), json!(flags.all_reps));
    }
    f.insert("deterministic".into(), json!(flags.deterministic));
    json!({
        "problem_path": path.display().to_string(),
        "problem": file.map(|f| serde_json::to_value(f).expect("problem file serializes")),
        "flags": Value::Object(f),
    })
}

/// Runs `command` on the problem at `path` and assembles the report.
pub fn run(command: Command, path: &Path, flags: &Flags) -> Report {
    let start = Instant::now();
    let mut report = Report {
        command: command.name().to_string(),
        ..Default::default()
    };
    let file = read_problem(path);
    report.inputs = inputs_json(path, file.as_ref().ok(), flags, command);
    let outcome = file.and_then(|file| {
        if command == Command::Check {
            return check(&file, flags);
        }
        let ctx = build_context(&file, flags)?;
        match command {
            Command::Check => unreachable!(),
            Command::Basis => basis(&ctx),
            Command::Eval => eval(&ctx),
            Command::Expand => expand(&ctx),
            Command::Verify => verify(&ctx),
            Command::Hankel => hankel(&ctx),
        }
    });
    match outcome {
        Ok((results, checks)) => {
            report.results = results;
            report.checks = checks;
        }
        Err(e) => report.set_error(&e),
    }
    if !flags.deterministic {
        report.timings = Some(json!({ "total_seconds": num(start.elapsed().as_secs_f64()) }));
    }
    report
}

type Outcome = Result<(Value, Vec<Check>), CliError>;

fn spec_json(spec: &CycleSpec) -> Value {
    json!({
        "p": spec.p,
        "delta": spec.delta.iter().map(mixed).collect::<Vec<_>>(),
        "theta_over_pi": spec.theta.as_ref().map(|t| t.iter().map(mixed).collect::<Vec<_>>()),
    })
}

fn reduced_json(rc: &ReducedCoordinates) -> Value {
    let rp = &rc.rp;
    json!({
        "A": (0..rp.d()).map(|i| rationals(&rp.a.row(i))).collect::<Vec<_>>(),
        "column_order": rp.column_order,
        "q": rp.q,
        "lattice_index": rp.lattice_index,
        "beta": complexes(&rc.beta),
        "y": complexes(&rc.y),
        "arg_yn_over_pi": mixed(&rc.arg_yn),
        "log_monomial": complex(rc.log_monomial),
        "det_B_sigma_inv": real(rc.det_inv),
    })
}

fn conditions_json(c: &[(usize, bool)]) -> Value {
    Value::Array(c.iter().map(|(col, ok)| json!({ "column": col, "ok": ok })).collect())
}

fn check(file: &ProblemFile, flags: &Flags) -> Outcome {
    let b = file.matrix()?;
    let assumption = validate_assumption_b(&b, &file.sigma);
    if !assumption.ok {
        return Err(CliError::Assumption(Box::new(assumption)));
    }
    let ctx = build_context(file, flags)?;
    let rp = &ctx.rc.rp;
    let geo = geometry_report(&rp.a)?;
    let nu: Vec<Value> = geo
        .nu
        .iter()
        .map(|(j, n)| {
            json!({
                "column": j,
                "nu": n.nu.iter().map(|(l, v)| json!([l, v.to_string()])).collect::<Vec<_>>(),
                "kappa": n.kappa.to_string(),
            })
        })
        .collect();
    let mut checks = vec![Check::flag("assumption", true, "all columns satisfy the simplex conditions")];
    let spec = ctx.spec(&ctx.p)?;
    let convergence = match convergence_status(rp, &spec, ctx.y(), ctx.cfg.mode) {
        Ok((conds, status)) => {
            checks.push(Check::flag("convergence", true, status.as_str()));
            json!({ "status": status.as_str(), "conditions": conditions_json(&conds) })
        }
        Err(e @ gkz_core::Error::DivergentConfiguration { .. }) => {
            checks.push(Check::flag("convergence", false, e.to_string()));
            json!({ "status": "divergent", "error": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    let pr = pole_and_resonance(ctx.beta(), rp, POLE_BOUND);
    let results = json!({
        "assumption": assumption_json(&assumption),
        "reduced": reduced_json(&ctx.rc),
        "geometry": {
            "eta": geo.eta,
            "tau_a": geo.tau_a,
            "nu": nu,
            "gevrey_index": geo.gevrey_index.to_string(),
        },
        "cycle": spec_json(&spec),
        "convergence": convergence,
        "pole": {
            "in_pole_set": pr.in_p,
            "resonant": pr.resonant,
            "pole_coordinate": pr.pole_coordinate,
        },
    });
    Ok((results, checks))
}

fn table_json(t: &SeriesTable) -> Value {
    let rows: Vec<Value> = t
        .support
        .iter()
        .map(|q| {
            let z = t.coefficients[q];
            json!({ "multi_index": q, "re": num(z.re), "im": num(z.im), "abs": num(z.norm()) })
        })
        .collect();
    json!({
        "k": t.k_label,
        "gevrey_index": t.gevrey_index.to_string(),
        "coefficients": rows,
    })
}

fn write_csv(dir: &Path, name: &str, rows: &[(Vec<u64>, Complex64)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut s = String::from("multi_index,re,im,abs\n");
    for (q, z) in rows {
        s.push_str(&format!("{},{},{},{}\n", multi_index(q), num(z.re), num(z.im), num(z.norm())));
    }
    std::fs::write(dir.join(format!("{name}.csv")), s).map_err(io)
}

fn label(k: &[u64]) -> String {
    k.iter().map(u64::to_string).collect::<Vec<_>>().join("_")
}

fn basis(ctx: &Context) -> Outcome {
    let rp = &ctx.rc.rp;
    let bd = basis_data(rp)?;
    let conn = connection_solve(&bd, ctx.beta(), rp)?;
    let tables = ctx.map(&bd.omega, |k| Ok(gevrey_table(k, ctx.beta(), rp, ctx.flags.order)?))?;
    if let Some(dir) = &ctx.flags.csv {
        for t in &tables {
            let rows: Vec<(Vec<u64>, Complex64)> = t.support.iter().map(|q| (q.clone(), t.coefficients[q])).collect();
            write_csv(dir, &format!("S_{}", label(t.k_label.as_deref().unwrap_or(&[]))), &rows)?;
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    let disjoint = tables.iter().flat_map(|t| &t.support).all(|q| seen.insert(q.clone()));
    let expected = (0..=ctx.flags.order)
        .map(|deg| multi_indices_of_degree(rp.n() - rp.d(), deg).len())
        .sum::<usize>();
    let checks = vec![
        Check::at_least("connection-determinant", conn.determinant.norm(), CONNECTION_DET_MIN),
        Check::flag(
            "supports-partition",
            disjoint && seen.len() == expected,
            format!("{} multi-indices covered of {expected}", seen.len()),
        ),
    ];
    let results = json!({
        "reduced": reduced_json(&ctx.rc),
        "omega": bd.omega,
        "coset_reps": bd.coset_reps,
        "connection": {
            "matrix": conn.matrix.iter().map(|r| complexes(r)).collect::<Vec<_>>(),
            "determinant": complex(conn.determinant),
        },
        "tables": tables.iter().map(table_json).collect::<Vec<_>>(),
    });
    Ok((results, checks))
}

/// `F` by quadrature inside the half-space and by continuation outside it.
fn eval_f_any(ctx: &Context, spec: &CycleSpec) -> Result<(EvalResult, &'static str), CliError> {
    let rp = &ctx.rc.rp;
    if ctx.beta().iter().all(|b| b.re < 0.0) {
        Ok((eval_f(rp, spec, ctx.beta(), ctx.y(), &ctx.cfg)?, "quadrature"))
    } else {
        Ok((continue_f(rp, spec, ctx.beta(), ctx.y(), &ctx.cfg)?, "continuation"))
    }
}

fn eval(ctx: &Context) -> Outcome {
    let reps = if ctx.flags.all_reps {
        basis_data(&ctx.rc.rp)?.coset_reps
    } else {
        vec![ctx.p.clone()]
    };
    let lift = ctx.rc.det_inv * ctx.rc.log_monomial.exp();
    let evaluations = ctx.map(&reps, |p| {
        let spec = ctx.spec(p)?;
        let (r, method) = eval_f_any(ctx, &spec)?;
        Ok(json!({
            "cycle": spec_json(&spec),
            "method": method,
            "status": r.status.as_str(),
            "I": complex(lift * r.value),
            "F": complex(r.value),
            "error_estimate_F": num(r.error_estimate),
            "error_estimate_I": num(lift.norm() * r.error_estimate),
            "phase": complex(r.phase),
            "conditions": conditions_json(&r.conditions_checked),
        }))
    })?;
    Ok((json!({ "reduced": reduced_json(&ctx.rc), "evaluations": evaluations }), vec![]))
}

fn expand(ctx: &Context) -> Outcome {
    let rp = &ctx.rc.rp;
    if rp.n() == rp.d() {
        return Err(CliError::parse("B", "expansion needs a column outside the simplex"));
    }
    let spec = ctx.spec(&ctx.p)?;
    let n = ctx.flags.order as usize;
    let rep = expansion_report(rp, &spec, ctx.beta(), ctx.y(), n, &ctx.cfg)?;
    if let Some(dir) = &ctx.flags.csv {
        let rows: Vec<(Vec<u64>, Complex64)> =
            rep.coefficients.iter().enumerate().map(|(m, &c)| (vec![m as u64], c)).collect();
        write_csv(dir, "expansion", &rows)?;
    }
    let results = json!({
        "reduced": reduced_json(&ctx.rc),
        "cycle": spec_json(&spec),
        "terms": n,
        "coefficients": rep.coefficients.iter().enumerate()
            .map(|(m, &c)| json!({ "m": m, "value": complex(c) }))
            .collect::<Vec<_>>(),
        "samples": rep.samples.iter()
            .map(|(s, r)| json!({ "scale": num(*s), "remainder": num(*r) }))
            .collect::<Vec<_>>(),
        "slope": rep.slope.map(num),
    });
    Ok((results, vec![]))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn verify(ctx: &Context) -> Outcome {
    let spec = ctx.spec(&ctx.p)?;
    let mut results = serde_json::Map::new();
    let mut checks = Vec::new();
    for suite in ctx.flags.suite.members() {
        let (value, mut c) = match suite {
            Suite::Gamma => verify_gamma(ctx, &spec)?,
            Suite::Contiguity => verify_contiguity(ctx, &spec)?,
            Suite::Continuation => verify_continuation(ctx, &spec)?,
            Suite::Connection => verify_connection(ctx)?,
            Suite::Hankel => verify_hankel(ctx, &spec)?,
            Suite::Expansion => verify_expansion(ctx, &spec)?,
            Suite::All => unreachable!(),
        };
        results.insert(suite.name().into(), value);
        checks.append(&mut c);
    }
    let results = json!({ "reduced": reduced_json(&ctx.rc), "cycle": spec_json(&spec), "suites": results });
    Ok((results, checks))
}

/// Integer translate of `beta` with every real part in `[-1, 0)`.
fn into_half_space(beta: &[Complex64]) -> Vec<Complex64> {
    beta.iter()
        .map(|b| if b.re < 0.0 { *b } else { b - (b.re.floor() + 1.0) })
        .collect()
}

fn verify_gamma(ctx: &Context, spec: &CycleSpec) -> Outcome {
    let rp = &ctx.rc.rp;
    let beta = into_half_space(ctx.beta());
    let zeros = vec![Complex64::new(0.0, 0.0); rp.n() - rp.d()];
    let got = eval_f(rp, spec, &beta, &zeros, &ctx.cfg)?.value;
    let want = eval_a0(&spec.p, &beta)?;
    let e = rel(got, want);
    Ok((
        json!({ "beta": complexes(&beta), "quadrature": complex(got), "closed_form": complex(want), "relative_error": num(e) }),
        vec![Check::below("gamma-closed-form", e, ctx.flags.tol)],
    ))
}

fn verify_contiguity(ctx: &Context, spec: &CycleSpec) -> Outcome {
    let rp = &ctx.rc.rp;
    let r = residual_suite(rp, spec, ctx.beta(), ctx.y(), DEFAULT_FD_STEP, &ctx.cfg)?;
    let fd_tol = ctx.flags.tol.max(FD_TOL_FLOOR);
    let mut checks = vec![Check::below("contiguity-beta", r.max_eq2(), ctx.flags.tol)];
    if !r.eq4.is_empty() {
        checks.push(Check::below("contiguity-derivative", r.max_eq4(), fd_tol));
    }
    let value = json!({
        "fd_step": num(DEFAULT_FD_STEP),
        "beta_relations": r.eq2.iter().enumerate()
            .map(|(k, e)| json!({ "coordinate": k, "residual": num(*e) }))
            .collect::<Vec<_>>(),
        "derivative_relations": r.eq4.iter()
            .map(|(l, e)| json!({ "column": l, "residual": num(*e) }))
            .collect::<Vec<_>>(),
    });
    Ok((value, checks))
}

fn verify_continuation(ctx: &Context, spec: &CycleSpec) -> Outcome {
    let rp = &ctx.rc.rp;
    let y = ctx.y();
    let mut checks = Vec::new();
    let mut value = serde_json::Map::new();
    let inside = ctx.beta().iter().all(|b| b.re < 0.0);
    if inside {
        let direct = eval_f(rp, spec, ctx.beta(), y, &ctx.cfg)?.value;
        let opts = ContinuationOptions {
            extra_depth: 1,
            ..Default::default()
        };
        let cont = continue_f_with(rp, spec, ctx.beta(), y, opts, &ctx.cfg)?.value;
        let e = rel(cont, direct);
        value.insert("overlap".into(), json!({ "direct": complex(direct), "continued": complex(cont), "relative_error": num(e) }));
        checks.push(Check::below("continuation-overlap", e, ctx.flags.tol));
    }
    let target: Vec<Complex64> = if inside {
        ctx.beta().iter().map(|b| b + 1.0).collect()
    } else {
        ctx.beta().to_vec()
    };
    if pole_and_resonance(&target, rp, POLE_BOUND).in_p {
        checks.push(Check::flag("continuation-order", true, "skipped: parameter lies on the pole set"));
    } else {
        let run = |pivot, extra_depth| {
            continue_f_with(rp, spec, &target, y, ContinuationOptions { pivot, extra_depth }, &ctx.cfg).map(|r| r.value)
        };
        let reference = run(PivotRule::MaxRealPart, 0)?;
        let variants = [(PivotRule::LowestIndex, 0), (PivotRule::MaxRealPart, 1), (PivotRule::LowestIndex, 1)];
        let mut worst: f64 = 0.0;
        for (pivot, depth) in variants {
            worst = worst.max(rel(run(pivot, depth)?, reference));
        }
        value.insert("order".into(), json!({ "beta": complexes(&target), "value": complex(reference), "max_relative_spread": num(worst) }));
        checks.push(Check::below("continuation-order", worst, ctx.flags.tol));
    }
    Ok((Value::Object(value), checks))
}

fn verify_connection(ctx: &Context) -> Outcome {
    let rp = &ctx.rc.rp;
    let beta = ctx.beta();
    let bd = basis_data(rp)?;
    let conn = connection_solve(&bd, beta, rp)?;
    let degree = ctx.flags.order.min(RECONSTRUCTION_DEGREE);
    let len = rp.n() - rp.d();
    let rows: Vec<usize> = (0..conn.reps.len()).collect();
    let errs = ctx.map(&rows, |&row| {
        let mut worst: f64 = 0.0;
        for deg in 0..=degree {
            for q in multi_indices_of_degree(len, deg) {
                let got = conn.reconstruct(rp, row, beta, &q)?;
                let want = taylor_coefficient(rp, &conn.reps[row], beta, &q)?;
                worst = worst.max((got - want).norm() / want.norm().max(1.0));
            }
        }
        Ok(worst)
    })?;
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let value = json!({
        "determinant": complex(conn.determinant),
        "max_degree": degree,
        "reconstruction_error": conn.reps.iter().zip(&errs)
            .map(|(p, e)| json!({ "p": p, "error": num(*e) }))
            .collect::<Vec<_>>(),
    });
    Ok((
        value,
        vec![
            Check::at_least("connection-determinant", conn.determinant.norm(), CONNECTION_DET_MIN),
            Check::below("connection-reconstruction", worst, ctx.flags.tol),
        ],
    ))
}

fn hankel_identity(ctx: &Context, spec: &CycleSpec, epsilons: &[f64]) -> Outcome {
    let rp = &ctx.rc.rp;
    let runs = ctx.map(epsilons, |&eps| {
        Ok(eval_h_upsilon(rp, spec, ctx.beta(), ctx.y(), eps, Winding::default(), &ctx.cfg)?)
    })?;
    let resonant = is_resonant(&rp.q, ctx.beta(), 0.0);
    let mut checks = Vec::new();
    let main = &runs[0];
    if main.hankel_factor == Complex64::new(0.0, 0.0) || resonant {
        let worst = runs.iter().map(|r| r.h.norm()).fold(0.0, f64::max);
        checks.push(Check::below("hankel-resonant-vanishing", worst, ctx.flags.tol));
    } else {
        checks.push(Check::below("hankel-identity", main.discrepancy(), ctx.flags.tol));
        if runs.len() > 1 {
            let spread = runs.iter().map(|r| rel(r.lhs, main.lhs)).fold(0.0, f64::max);
            checks.push(Check::below("hankel-epsilon-independence", spread, ctx.flags.tol));
        }
    }
    let value = json!({
        "q": rp.q,
        "resonant": resonant,
        "hankel_factor": complex(main.hankel_factor),
        "runs": epsilons.iter().zip(&runs).map(|(e, r)| json!({
            "epsilon": num(*e),
            "H": complex(r.h),
            "quadrature_error": num(r.error),
            "lhs": complex(r.lhs),
            "predicted": complex(r.predicted),
            "discrepancy": num(r.discrepancy()),
        })).collect::<Vec<_>>(),
        "conditions": conditions_json(&main.conditions_checked),
    });
    Ok((value, checks))
}

fn epsilon_ladder(e: f64) -> [f64; 3] {
    [e, e / 2.0, e * 2.0]
}

fn verify_hankel(ctx: &Context, spec: &CycleSpec) -> Outcome {
    hankel_identity(ctx, spec, &epsilon_ladder(ctx.epsilon))
}

fn hankel(ctx: &Context) -> Outcome {
    let spec = ctx.spec(&ctx.p)?;
    let (value, checks) = hankel_identity(ctx, &spec, &epsilon_ladder(ctx.epsilon))?;
    Ok((json!({ "reduced": reduced_json(&ctx.rc), "cycle": spec_json(&spec), "identity": value }), checks))
}

/// Window around the expected remainder order.
pub const SLOPE_WINDOW: f64 = 0.3;

fn verify_expansion(ctx: &Context, spec: &CycleSpec) -> Outcome {
    let rp = &ctx.rc.rp;
    if rp.n() == rp.d() {
        return Err(CliError::parse("B", "expansion needs a column outside the simplex"));
    }
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for n in 1..=3usize {
        let rep = expansion_report(rp, spec, ctx.beta(), ctx.y(), n, &ctx.cfg)?;
        match rep.slope {
            Some(s) => {
                checks.push(Check::below(format!("expansion-slope-{n}"), (s - n as f64).abs(), SLOPE_WINDOW));
                rows.push(json!({ "terms": n, "slope": num(s) }));
            }
            None => checks.push(Check::flag(format!("expansion-slope-{n}"), true, "skipped: y_n = 0")),
        }
    }
    Ok((json!({ "slopes": rows }), checks))
}
