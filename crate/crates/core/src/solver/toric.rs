use super::continuation::continue_f;
use super::eval::{eval_f, EvalResult};
use super::SolverConfig;
use crate::cycles::{choose_delta, solve_theta, CycleSpec};
use crate::error::{Error, Result};
use crate::exact_lattice::{reduce_problem, IntMatrix, ReducedProblem};
use crate::geometry::validate_assumption_b;
use crate::rational::{arg_over_pi, dot_mixed, rat_to_f64, MixedReal};
use num_complex::Complex64;
use std::f64::consts::PI;

/// The raw datum `(B, sigma, gamma, x)`. Arguments of `x_k` are carried on the
/// universal cover in units of pi; they are mandatory for `k` in `sigma`.
#[derive(Clone, Debug, PartialEq)]
pub struct ToricProblem {
    pub b: IntMatrix,
    pub sigma: Vec<usize>,
    pub gamma: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub x_arg: Vec<Option<MixedReal>>,
}

/// The reduced problem with `beta = B_sigma^{-1} gamma` and
/// `y_j = x_j x_sigma^{-B_sigma^{-1} b(j)}` in reduced column order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedCoordinates {
    pub rp: ReducedProblem,
    pub beta: Vec<Complex64>,
    pub y: Vec<Complex64>,
    /// `arg y_n / pi` on the universal cover.
    pub arg_yn: MixedReal,
    /// `ln x_sigma^beta`.
    pub log_monomial: Complex64,
    /// `det(B_sigma^{-1})`.
    pub det_inv: f64,
}

impl ToricProblem {
    pub fn new(
        b: IntMatrix,
        sigma: Vec<usize>,
        gamma: Vec<Complex64>,
        x: Vec<Complex64>,
        x_arg: Vec<Option<MixedReal>>,
    ) -> Result<Self> {
        let (d, n) = (b.rows(), b.cols());
        for (what, got, expected) in [("gamma", gamma.len(), d), ("x", x.len(), n), ("x_arg", x_arg.len(), n)] {
            if got != expected {
                return Err(Error::DimensionMismatch { what, expected, got });
            }
        }
        let report = validate_assumption_b(&b, &sigma);
        if !report.ok {
            let why = report.note.clone().unwrap_or_else(|| {
                let bad: Vec<String> = report
                    .columns
                    .iter()
                    .filter(|c| !c.ok)
                    .map(|c| format!("column {}: {}", c.column, c.reason.clone().unwrap_or_default()))
                    .collect();
                bad.join("; ")
            });
            return Err(Error::InvalidInput(format!("assumption on B fails: {why}")));
        }
        for &k in &sigma {
            if x[k] == Complex64::new(0.0, 0.0) {
                return Err(Error::ZeroSimplexCoordinate(k));
            }
            if x_arg[k].is_none() {
                return Err(Error::InvalidInput(format!("missing argument for simplex coordinate x_{k}")));
            }
        }
        Ok(ToricProblem { b, sigma, gamma, x, x_arg })
    }

    fn arg(&self, k: usize) -> MixedReal {
        self.x_arg[k].unwrap_or_else(|| arg_over_pi(self.x[k]))
    }

    fn log_x(&self, k: usize) -> Complex64 {
        Complex64::new(self.x[k].norm().ln(), PI * self.arg(k).value())
    }

    pub fn reduce(&self) -> Result<ReducedCoordinates> {
        let rp = reduce_problem(&self.b, &self.sigma)?;
        let d = rp.d();
        let inv = &rp.b_sigma_inv;
        let beta: Vec<Complex64> = (0..d)
            .map(|i| inv.row(i).iter().zip(&self.gamma).map(|(c, g)| rat_to_f64(c) * g).sum())
            .collect();
        let log_sigma: Vec<Complex64> = self.sigma.iter().map(|&k| self.log_x(k)).collect();
        let arg_sigma: Vec<MixedReal> = self.sigma.iter().map(|&k| self.arg(k)).collect();
        let mut y = Vec::with_capacity(rp.n() - d);
        let mut arg_yn = MixedReal::zero();
        for j in d..rp.n() {
            let orig = rp.column_order[j];
            let c = rp.column(j);
            if self.x[orig] == Complex64::new(0.0, 0.0) {
                y.push(Complex64::new(0.0, 0.0));
                continue;
            }
            let shift: Complex64 = c.iter().zip(&log_sigma).map(|(c, l)| rat_to_f64(c) * l).sum();
            y.push((self.log_x(orig) - shift).exp());
            if j == rp.n() - 1 {
                arg_yn = self.arg(orig) - dot_mixed(&c, &arg_sigma);
            }
        }
        let log_monomial = beta.iter().zip(&log_sigma).map(|(b, l)| b * l).sum();
        let det_inv = 1.0 / rp.b_sigma.det()? as f64;
        Ok(ReducedCoordinates { rp, beta, y, arg_yn, log_monomial, det_inv })
    }

    /// Cycle for `p` with `delta` chosen to centre `arg y_n` in its sector and
    /// the ray arguments solved from the supplied arguments of `x_sigma`.
    pub fn auto_spec(&self, p: Vec<i64>) -> Result<CycleSpec> {
        let rc = self.reduce()?;
        let d = rc.rp.d();
        let delta = if rc.rp.n() > d {
            choose_delta(&rc.rp.a_n(), &p, rc.arg_yn)?
        } else {
            vec![MixedReal::zero(); d]
        };
        self.spec_with(p, delta)
    }

    pub fn spec_with(&self, p: Vec<i64>, delta: Vec<MixedReal>) -> Result<CycleSpec> {
        let mut spec = CycleSpec::new(p, delta)?;
        let arg_sigma: Vec<MixedReal> = self.sigma.iter().map(|&k| self.arg(k)).collect();
        spec.theta = Some(solve_theta(&self.b, &self.sigma, &arg_sigma, &spec.p, &spec.delta)?);
        Ok(spec)
    }
}

fn lift(rc: &ReducedCoordinates, r: EvalResult) -> EvalResult {
    let m = rc.det_inv * rc.log_monomial.exp();
    EvalResult {
        value: m * r.value,
        error_estimate: m.norm() * r.error_estimate,
        ..r
    }
}

/// `I_C(gamma; x) = det(B_sigma^{-1}) x_sigma^beta F(beta; y)`.
pub fn eval_i(tp: &ToricProblem, spec: &CycleSpec, cfg: &SolverConfig) -> Result<EvalResult> {
    let rc = tp.reduce()?;
    let r = eval_f(&rc.rp, spec, &rc.beta, &rc.y, cfg)?;
    Ok(lift(&rc, r))
}

/// As [`eval_i`], with `F` continued outside the half-space.
pub fn eval_i_continued(tp: &ToricProblem, spec: &CycleSpec, cfg: &SolverConfig) -> Result<EvalResult> {
    let rc = tp.reduce()?;
    let r = continue_f(&rc.rp, spec, &rc.beta, &rc.y, cfg)?;
    Ok(lift(&rc, r))
}
