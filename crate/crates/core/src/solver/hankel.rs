use super::continuation::continue_f;
use super::{convergence_status, Integrand, SolverConfig};
use crate::cycles::{hankel_factor, upsilon_strata_with, CycleSpec, Winding};
use crate::error::{Error, Result};
use crate::exact_lattice::ReducedProblem;
use crate::numerics::quad_piece;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub struct HankelResult {
    /// Integral over `Upsilon(epsilon)` without the phase.
    pub h: Complex64,
    pub error: f64,
    pub hankel_factor: Complex64,
    /// `exp(-i pi <1 + 2p + delta, beta>) H`.
    pub lhs: Complex64,
    /// Factor times the continued `F`; zero when the factor vanishes.
    pub predicted: Complex64,
    pub conditions_checked: Vec<(usize, bool)>,
}

impl HankelResult {
    /// `|lhs - predicted|` relative to `|predicted|`, or absolute when the
    /// factor vanishes.
    pub fn discrepancy(&self) -> f64 {
        let diff = (self.lhs - self.predicted).norm();
        if self.predicted.norm() > 0.0 {
            diff / self.predicted.norm()
        } else {
            diff
        }
    }
}

/// Integral of the reduced integrand over the stratified rapid-decay cycle,
/// together with the predicted value from the ray integral.
pub fn eval_h_upsilon(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    beta: &[Complex64],
    y: &[Complex64],
    epsilon: f64,
    winding: Winding,
    cfg: &SolverConfig,
) -> Result<HankelResult> {
    if beta.len() != rp.d() {
        return Err(Error::DimensionMismatch {
            what: "beta",
            expected: rp.d(),
            got: beta.len(),
        });
    }
    let (conditions_checked, _) = convergence_status(rp, spec, y, cfg.mode)?;
    let cycle = upsilon_strata_with(epsilon, &rp.a, &rp.q, winding)?;
    let integrand = Integrand::new(rp, spec, beta, y);
    let mut h = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for piece in &cycle.pieces {
        let r = quad_piece(&cycle, piece, |l| integrand.eval(l), &cfg.quad)?;
        h += r.value;
        error += r.error;
    }
    let factor = hankel_factor(&rp.q, beta, winding);
    let phase = spec.phase_beta(beta);
    let predicted = if factor == Complex64::new(0.0, 0.0) {
        factor
    } else {
        factor * continue_f(rp, spec, beta, y, cfg)?.value
    };
    Ok(HankelResult {
        h,
        error,
        hankel_factor: factor,
        lhs: phase * h,
        predicted,
        conditions_checked,
    })
}
