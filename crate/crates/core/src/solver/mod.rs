//! Evaluation of the reduced integrals, their expansions, continuation in the
//! parameter, the connection problem and the rapid-decay identity.
//!
//! Coordinates `y` always hold the non-simplex columns `d..n` of the reduced
//! matrix, in that order.

mod continuation;
mod convergence;
mod eval;
mod hankel;
mod series;
mod toric;

pub use continuation::{
    continue_f, continue_f_with, pole_and_resonance, residual_suite, ContinuationOptions,
    PivotRule, PoleResonance, ResidualReport, DEFAULT_FD_STEP,
};
pub use convergence::{convergence_status, Certification, ConvergenceMode};
pub use eval::{
    eval_a0, eval_a_coeff, eval_f, expansion_report, multi_indices_of_degree, taylor_coefficient,
    EvalResult, ExpansionReport,
};
pub use hankel::{eval_h_upsilon, HankelResult};
pub use series::{
    asymptotic_table, connection_solve, gevrey_coefficient, gevrey_table, Connection, SeriesKind,
    SeriesTable,
};
pub use toric::{eval_i, eval_i_continued, ReducedCoordinates, ToricProblem};

use crate::numerics::QuadratureConfig;
use crate::rational::rat_to_f64;
use crate::{cycles::CycleSpec, exact_lattice::ReducedProblem};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub quad: QuadratureConfig,
    pub mode: ConvergenceMode,
    /// Highest total degree summed in the Taylor development of the coefficients.
    pub taylor_max_degree: u64,
    /// Cap on memoised evaluations in the continuation recursion.
    pub recursion_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            quad: QuadratureConfig::default(),
            mode: ConvergenceMode::Certified,
            taylor_max_degree: 200,
            recursion_budget: 100_000,
        }
    }
}

impl SolverConfig {
    pub fn with_quad(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_mode(mut self, mode: ConvergenceMode) -> Self {
        self.mode = mode;
        self
    }
}

/// `u^{-beta} exp(-sum e^{i pi delta_k} u_k + sum z_j u^{a(j)})` as a function
/// of `ln u` on the universal cover.
pub(crate) struct Integrand {
    neg_beta: Vec<Complex64>,
    lin: Vec<Complex64>,
    terms: Vec<(Vec<f64>, Complex64)>,
}

/// Logs beyond this make some monomial overflow; the dominant term then has
/// negative real part and the integrand is zero to working precision.
const LOG_OVERFLOW: f64 = 700.0;

impl Integrand {
    pub(crate) fn new(rp: &ReducedProblem, spec: &CycleSpec, beta: &[Complex64], y: &[Complex64]) -> Self {
        let d = rp.d();
        let terms = (d..rp.n())
            .filter(|&j| y[j - d] != Complex64::new(0.0, 0.0))
            .map(|j| {
                let a = rp.column(j);
                let z = spec.twist(&a) * y[j - d];
                (a.iter().map(rat_to_f64).collect(), z)
            })
            .collect();
        Integrand {
            neg_beta: beta.iter().map(|b| -b).collect(),
            lin: (0..d).map(|k| -spec.ray_phase(k)).collect(),
            terms,
        }
    }

    pub(crate) fn eval(&self, ln_u: &[Complex64]) -> Complex64 {
        let mut expo = Complex64::new(0.0, 0.0);
        for (k, l) in ln_u.iter().enumerate() {
            if l.re > LOG_OVERFLOW || !l.re.is_finite() {
                return Complex64::new(0.0, 0.0);
            }
            expo += self.neg_beta[k] * l + self.lin[k] * l.exp();
        }
        for (a, z) in &self.terms {
            let l: Complex64 = a.iter().zip(ln_u).map(|(a, l)| a * l).sum();
            if l.re > LOG_OVERFLOW {
                return Complex64::new(0.0, 0.0);
            }
            expo += z * l.exp();
        }
        if expo.re < -745.0 {
            return Complex64::new(0.0, 0.0);
        }
        expo.exp()
    }

    pub(crate) fn eval_real(&self, ln_r: &[f64]) -> Complex64 {
        let l: Vec<Complex64> = ln_r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.eval(&l)
    }
}
