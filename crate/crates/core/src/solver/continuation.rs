use super::eval::{eval_f, EvalResult};
use super::{convergence_status, Certification, SolverConfig};
use crate::cycles::CycleSpec;
use crate::error::{Error, Result};
use crate::exact_lattice::ReducedProblem;
use crate::rational::{rat_to_f64, Rational};
use num_complex::Complex64;
use num_traits::{Signed, Zero};
use std::collections::HashMap;

const RESONANCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PoleResonance {
    /// Some `beta_k` lies in the projection `pi_k(N A)`.
    pub in_p: bool,
    /// Some `q_k beta_k` is an integer.
    pub resonant: bool,
    pub pole_coordinate: Option<usize>,
}

/// Integer `N` with `q_k beta_k` within tolerance of it, if any.
fn near_integer(x: Complex64, q: i64) -> Option<i64> {
    let v = x * q as f64;
    let n = v.re.round();
    let tol = RESONANCE_TOL * q as f64 * (x.norm() + 1.0);
    (v.im.abs() <= tol && (v.re - n).abs() <= tol).then_some(n as i64)
}

/// Pole and resonance predicates. Membership of `q_k beta_k` in the monoid
/// generated by `q_k a(l)_k` is decided by dynamic programming up to `bound`;
/// beyond it every value is representable since the generators are coprime.
pub fn pole_and_resonance(beta: &[Complex64], rp: &ReducedProblem, bound: usize) -> PoleResonance {
    let mut out = PoleResonance {
        in_p: false,
        resonant: false,
        pole_coordinate: None,
    };
    for (k, b) in beta.iter().enumerate() {
        let qk = rp.q[k];
        let Some(n) = near_integer(*b, qk) else {
            continue;
        };
        out.resonant = true;
        let row = rp.a.row(k);
        let member = if row.iter().any(|x| x.is_negative()) {
            true
        } else if n < 0 {
            false
        } else if n as usize > bound {
            true
        } else {
            let gens: Vec<usize> = row
                .iter()
                .filter(|x| x.is_positive())
                .map(|x| (x * Rational::from_integer(qk)).to_integer() as usize)
                .collect();
            let n = n as usize;
            let mut reach = vec![false; n + 1];
            reach[0] = true;
            for v in 1..=n {
                reach[v] = gens.iter().any(|&g| g <= v && reach[v - g]);
            }
            reach[n]
        };
        if member && !out.in_p {
            out.in_p = true;
            out.pole_coordinate = Some(k);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PivotRule {
    /// Reduce the coordinate with the largest real part.
    #[default]
    MaxRealPart,
    /// Reduce the first coordinate with nonnegative real part.
    LowestIndex,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ContinuationOptions {
    pub pivot: PivotRule,
    /// Further applications of the recurrence below the half-space boundary.
    pub extra_depth: usize,
}

struct Session<'a> {
    rp: &'a ReducedProblem,
    spec: &'a CycleSpec,
    beta: &'a [Complex64],
    y: &'a [Complex64],
    cfg: &'a SolverConfig,
    opts: ContinuationOptions,
    memo: HashMap<(Vec<Rational>, usize), (Complex64, f64)>,
}

impl Session<'_> {
    fn value(&mut self, shift: &[Rational], extra: usize) -> Result<(Complex64, f64)> {
        let key = (shift.to_vec(), extra);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        if self.memo.len() >= self.cfg.recursion_budget {
            return Err(Error::RecursionBudgetExceeded {
                budget: self.cfg.recursion_budget,
            });
        }
        let d = self.rp.d();
        let cur: Vec<Complex64> = self.beta.iter().zip(shift).map(|(b, s)| b - rat_to_f64(s)).collect();
        let inside = cur.iter().all(|b| b.re < 0.0);
        let out = if inside && extra == 0 {
            let r = eval_f(self.rp, self.spec, &cur, self.y, self.cfg)?;
            (r.value, r.error_estimate)
        } else {
            let k = match self.opts.pivot {
                PivotRule::MaxRealPart => (0..d)
                    .max_by(|&i, &j| cur[i].re.partial_cmp(&cur[j].re).unwrap().then(j.cmp(&i)))
                    .unwrap(),
                PivotRule::LowestIndex => (0..d).find(|&i| cur[i].re >= 0.0).unwrap_or(0),
            };
            let bk = cur[k];
            if bk.norm() <= 1e-9 * (self.beta[k].norm() + 1.0) {
                return Err(Error::PoleEncountered {
                    coordinate: k,
                    value: bk.re,
                });
            }
            let child_extra = if inside { extra - 1 } else { extra };
            let mut sum = Complex64::zero();
            let mut err = 0.0;
            for j in d..self.rp.n() {
                let yj = self.y[j - d];
                let a = self.rp.column(j);
                if yj == Complex64::zero() || a[k].is_zero() {
                    continue;
                }
                let next: Vec<Rational> = shift.iter().zip(&a).map(|(s, x)| s + x).collect();
                let (v, e) = self.value(&next, child_extra)?;
                let c = yj * rat_to_f64(&a[k]);
                sum += c * v;
                err += c.norm() * e;
            }
            let mut next = shift.to_vec();
            next[k] += Rational::from_integer(1);
            let (v, e) = self.value(&next, child_extra)?;
            sum += v;
            err += e;
            (sum / bk, err / bk.norm())
        };
        self.memo.insert(key, out);
        Ok(out)
    }
}

/// Meromorphic continuation of `F_{p,delta}` in `beta` with the default options.
pub fn continue_f(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    cfg: &SolverConfig,
) -> Result<EvalResult> {
    continue_f_with(rp, spec, beta, y, ContinuationOptions::default(), cfg)
}

pub fn continue_f_with(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    opts: ContinuationOptions,
    cfg: &SolverConfig,
) -> Result<EvalResult> {
    if beta.iter().all(|b| b.re < 0.0) && opts.extra_depth == 0 {
        return eval_f(rp, spec, beta, y, cfg);
    }
    let pr = pole_and_resonance(beta, rp, 100_000);
    if pr.in_p {
        let k = pr.pole_coordinate.unwrap();
        return Err(Error::PoleEncountered {
            coordinate: k,
            value: beta[k].re,
        });
    }
    let (conditions_checked, _) = convergence_status(rp, spec, y, cfg.mode)?;
    let mut session = Session {
        rp,
        spec,
        beta,
        y,
        cfg,
        opts,
        memo: HashMap::new(),
    };
    let zero = vec![Rational::zero(); rp.d()];
    let (value, error_estimate) = session.value(&zero, opts.extra_depth)?;
    Ok(EvalResult {
        value,
        error_estimate,
        conditions_checked,
        phase: spec.phase_beta(beta),
        status: Certification::Continued,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// Relative residual of the `k`-th contiguity relation, per `k`.
    pub eq2: Vec<f64>,
    /// `(l, relative residual of dF/dy_l = F(beta - a(l)))` for non-simplex `l`.
    pub eq4: Vec<(usize, f64)>,
}

impl ResidualReport {
    pub fn max_eq2(&self) -> f64 {
        self.eq2.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_eq4(&self) -> f64 {
        self.eq4.iter().map(|e| e.1).fold(0.0, f64::max)
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Residuals of the contiguity relations, with values from [`continue_f`].
/// The derivative in `y_l` is a central difference with step
/// `h_rel * max(1, |y_l|)`.
pub fn residual_suite(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    h_rel: f64,
    cfg: &SolverConfig,
) -> Result<ResidualReport> {
    let d = rp.d();
    let f = |b: &[Complex64], yy: &[Complex64]| continue_f(rp, spec, b, yy, cfg).map(|r| r.value);
    let shifted = |a: &[Rational]| -> Vec<Complex64> {
        beta.iter().zip(a).map(|(b, x)| b - rat_to_f64(x)).collect()
    };
    let f0 = f(beta, y)?;
    let mut f_minus_a = HashMap::new();
    for j in d..rp.n() {
        if y[j - d] != Complex64::zero() {
            f_minus_a.insert(j, f(&shifted(&rp.column(j)), y)?);
        }
    }
    let mut eq2 = Vec::with_capacity(d);
    for k in 0..d {
        let mut e = vec![Rational::zero(); d];
        e[k] = Rational::from_integer(1);
        let lhs = beta[k] * f0;
        let fe = f(&shifted(&e), y)?;
        let mut scale = lhs.norm().max(fe.norm());
        let mut rhs = fe;
        for (&j, fj) in &f_minus_a {
            let t = rat_to_f64(&rp.column(j)[k]) * y[j - d] * fj;
            scale = scale.max(t.norm());
            rhs += t;
        }
        eq2.push((lhs - rhs).norm() / scale);
    }
    let mut eq4 = Vec::new();
    let mut cols: Vec<usize> = f_minus_a.keys().copied().collect();
    cols.sort_unstable();
    for j in cols {
        let h = h_rel * y[j - d].norm().max(1.0);
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j - d] += h;
        ym[j - d] -= h;
        let deriv = (f(beta, &yp)? - f(beta, &ym)?) / (2.0 * h);
        let target = f_minus_a[&j];
        eq4.push((j, (deriv - target).norm() / deriv.norm().max(target.norm())));
    }
    Ok(ResidualReport { eq2, eq4 })
}
