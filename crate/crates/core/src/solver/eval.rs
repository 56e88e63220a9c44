use super::{convergence_status, Certification, Integrand, SolverConfig};
use crate::cycles::CycleSpec;
use crate::error::{Error, Result};
use crate::exact_lattice::ReducedProblem;
use crate::numerics::{ln_factorial, log_gamma, quad_nested, Axis};
use crate::rational::{phase_pi_f64, rat_to_f64, Rational};
use num_complex::Complex64;
use num_traits::Zero;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub error_estimate: f64,
    /// Convergence conditions checked, by reduced column index.
    pub conditions_checked: Vec<(usize, bool)>,
    /// `exp(-i pi <1 + 2p + delta, beta>)`.
    pub phase: Complex64,
    pub status: Certification,
}

/// `F_{p,delta}(beta; y)` by quadrature over the positive orthant.
pub fn eval_f(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    cfg: &SolverConfig,
) -> Result<EvalResult> {
    let d = rp.d();
    if beta.len() != d {
        return Err(Error::DimensionMismatch {
            what: "beta",
            expected: d,
            got: beta.len(),
        });
    }
    if let Some(k) = beta.iter().position(|b| b.re >= 0.0) {
        return Err(Error::ParameterOutOfHalfSpace { coordinate: k });
    }
    let (conditions_checked, status) = convergence_status(rp, spec, y, cfg.mode)?;
    let integrand = Integrand::new(rp, spec, beta, y);
    let axes: Vec<Axis> = (0..d).map(|_| Axis::Line).collect();
    let res = quad_nested(&axes, &|u| integrand.eval_real(u), &cfg.quad)?;
    let phase = spec.phase_beta(beta);
    Ok(EvalResult {
        value: phase * res.value,
        error_estimate: res.error * phase.norm(),
        conditions_checked,
        phase,
        status,
    })
}

fn pole_error(k: usize, v: Complex64) -> Error {
    Error::PoleEncountered {
        coordinate: k,
        value: v.re,
    }
}

/// `ln A0_p(beta)`, with poles reported per coordinate.
fn log_a0(p: &[i64], beta: &[Complex64]) -> Result<Complex64> {
    let mut s = Complex64::zero();
    let mut re = 0.0;
    let mut im = 0.0;
    for (k, (&pk, b)) in p.iter().zip(beta).enumerate() {
        s += log_gamma(-b).map_err(|_| pole_error(k, *b))?;
        re += (2 * pk + 1) as f64 * b.re;
        im += (2 * pk + 1) as f64 * b.im;
    }
    // exp(-i pi <2p+1, beta>) = exp(pi im) * exp(-i pi re)
    let ph = phase_pi_f64(-re);
    Ok(s + Complex64::new(PI * im, ph.im.atan2(ph.re)))
}

/// `exp(i pi <2p+1, -beta>) Gamma(-beta)`, the integral without `y`-terms.
pub fn eval_a0(p: &[i64], beta: &[Complex64]) -> Result<Complex64> {
    if p.len() != beta.len() {
        return Err(Error::DimensionMismatch {
            what: "p",
            expected: beta.len(),
            got: p.len(),
        });
    }
    Ok(log_a0(p, beta)?.exp())
}

/// Multi-indices of `len` nonnegative entries summing to `degree`, in
/// lexicographically decreasing order.
pub fn multi_indices_of_degree(len: usize, degree: u64) -> Vec<Vec<u64>> {
    if len == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    if len == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in multi_indices_of_degree(len - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Coefficient of `y^q / q!` in the expansion of `F_{p,delta}` at `y = 0`:
/// `A0_p(beta - A_{sigma bar} q)`, for `q` indexed by the columns `d..n`.
pub fn taylor_coefficient(rp: &ReducedProblem, p: &[i64], beta: &[Complex64], q: &[u64]) -> Result<Complex64> {
    let shifted = shifted_beta(rp, beta, q);
    eval_a0(p, &shifted)
}

fn shifted_beta(rp: &ReducedProblem, beta: &[Complex64], q: &[u64]) -> Vec<Complex64> {
    let d = rp.d();
    let mut shift = vec![Rational::zero(); d];
    for (i, &qi) in q.iter().enumerate() {
        if qi > 0 {
            let col = rp.column(d + i);
            for k in 0..d {
                shift[k] += col[k] * Rational::from_integer(qi as i64);
            }
        }
    }
    beta.iter().zip(&shift).map(|(b, s)| b - rat_to_f64(s)).collect()
}

const NEGLIGIBLE_SHELLS: usize = 3;

/// `A(beta; m, y') = sum_{m'} A0_p(beta - m a(n) - sum_j m'_j a(j)) y'^{m'} / m'!`
/// summed by total degree of `m'` until three consecutive shells are
/// negligible or `trunc` is reached.
pub fn eval_a_coeff(
    rp: &ReducedProblem,
    p: &[i64],
    beta: &[Complex64],
    m: u64,
    y_prime: &[Complex64],
    trunc: u64,
) -> Result<Complex64> {
    let d = rp.d();
    let len = rp.n() - d - 1;
    if y_prime.len() != len {
        return Err(Error::DimensionMismatch {
            what: "y'",
            expected: len,
            got: y_prime.len(),
        });
    }
    let ln_y: Vec<Option<Complex64>> = y_prime
        .iter()
        .map(|y| (*y != Complex64::zero()).then(|| y.ln()))
        .collect();
    let mut sum = Complex64::zero();
    let mut quiet = 0;
    for degree in 0..=trunc {
        let mut shell_max: f64 = 0.0;
        for mp in multi_indices_of_degree(len, degree) {
            let mut ln_term = Complex64::zero();
            let mut zero = false;
            for (j, &e) in mp.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match ln_y[j] {
                    Some(l) => ln_term += l * e as f64 - ln_factorial(e),
                    None => zero = true,
                }
            }
            if zero {
                continue;
            }
            let mut q = mp.clone();
            q.push(m);
            let shifted = shifted_beta(rp, beta, &q);
            let term = (log_a0(p, &shifted)? + ln_term).exp();
            shell_max = shell_max.max(term.norm());
            sum += term;
        }
        if degree > 0 && shell_max <= 1e-17 * sum.norm() {
            quiet += 1;
            if quiet >= NEGLIGIBLE_SHELLS {
                break;
            }
        } else {
            quiet = 0;
        }
        if len == 0 {
            break;
        }
    }
    Ok(sum)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionReport {
    /// `A(beta; m, y') / m!` for `m < N`.
    pub coefficients: Vec<Complex64>,
    /// `(s, |F(y', s y_n) - partial sum|)`.
    pub samples: Vec<(f64, f64)>,
    /// Least-squares slope of `log2 R` against `log2 s`; absent when `y_n = 0`.
    pub slope: Option<f64>,
}

pub const EXPANSION_SCALES: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// Truncated expansion in `y_n` and the observed order of its remainder.
pub fn expansion_report(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    n_terms: usize,
    cfg: &SolverConfig,
) -> Result<ExpansionReport> {
    if n_terms > 12 {
        return Err(Error::InvalidInput("expansion order must be at most 12".into()));
    }
    let d = rp.d();
    let len = rp.n() - d;
    if y.len() != len {
        return Err(Error::DimensionMismatch {
            what: "y",
            expected: len,
            got: y.len(),
        });
    }
    let y_prime = &y[..len - 1];
    let y_n = y[len - 1];
    let coefficients = (0..n_terms as u64)
        .map(|m| {
            Ok(eval_a_coeff(rp, &spec.p, beta, m, y_prime, cfg.taylor_max_degree)?
                * (-ln_factorial(m)).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut samples = Vec::new();
    for s in EXPANSION_SCALES {
        let mut ys = y.to_vec();
        ys[len - 1] = y_n * s;
        let f = eval_f(rp, spec, beta, &ys, cfg)?.value;
        let mut partial = Complex64::zero();
        let mut pow = Complex64::new(1.0, 0.0);
        for c in &coefficients {
            partial += c * pow;
            pow *= y_n * s;
        }
        samples.push((s, (f - partial).norm()));
    }
    let slope = (y_n != Complex64::zero()).then(|| {
        let pts: Vec<(f64, f64)> = samples.iter().map(|(s, r)| (s.log2(), r.log2())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(ExpansionReport {
        coefficients,
        samples,
        slope,
    })
}
