use crate::cycles::{check_condition, CycleSpec};
use crate::error::{Error, Result};
use crate::exact_lattice::ReducedProblem;
use crate::geometry::geometry_report;
use crate::rational::{arg_over_pi, rat_to_f64};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConvergenceMode {
    /// Conditions on every column of the outer boundary `tau_A`.
    #[default]
    Certified,
    /// Conditions on the vertices `eta` plus the smallness test on the other
    /// boundary columns.
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    Certified,
    Extended,
    /// Obtained through the contiguity recurrence.
    Continued,
}

impl Certification {
    pub fn as_str(self) -> &'static str {
        match self {
            Certification::Certified => "convergent-certified",
            Certification::Extended => "convergent-extended",
            Certification::Continued => "continued",
        }
    }
}

/// Checks the sufficient convergence conditions for the columns present in
/// the integrand (simplex columns and those with `y_j != 0`). Returns the
/// per-column verdicts with the certification level reached.
pub fn convergence_status(
    rp: &ReducedProblem,
    spec: &CycleSpec,
    y: &[Complex64],
    mode: ConvergenceMode,
) -> Result<(Vec<(usize, bool)>, Certification)> {
    let d = rp.d();
    if y.len() != rp.n() - d {
        return Err(Error::DimensionMismatch {
            what: "y",
            expected: rp.n() - d,
            got: y.len(),
        });
    }
    let active: Vec<usize> = (d..rp.n()).filter(|&j| y[j - d] != Complex64::new(0.0, 0.0)).collect();
    let sub = rp.restrict(&active);
    let sub_y: Vec<Complex64> = active.iter().map(|&j| y[j - d]).collect();
    // sub column index -> reduced column index
    let to_full = |c: usize| if c < d { c } else { active[c - d] };
    let geo = geometry_report(&sub.a)?;

    let mut checked = Vec::new();
    let mut failing = Vec::new();
    for &c in &geo.tau_a {
        let ok = check_condition(c, &sub.a, &sub_y, spec)?;
        checked.push((to_full(c), ok));
        if !ok {
            failing.push(to_full(c));
        }
    }
    if failing.is_empty() {
        return Ok((checked, Certification::Certified));
    }
    if mode == ConvergenceMode::Extended {
        let mut eta_ok = true;
        let mut cos_theta = f64::INFINITY;
        for l in geo.eta.iter().copied().chain(0..d).collect::<std::collections::BTreeSet<_>>() {
            let arg = if l < d {
                0.0
            } else {
                arg_over_pi(sub_y[l - d]).value()
            };
            let phi = (arg + spec.pairing(&sub.a.column(l)).value()) * PI;
            eta_ok &= check_condition(l, &sub.a, &sub_y, spec)?;
            cos_theta = cos_theta.min(-phi.cos());
        }
        let mut k_sum = 0.0;
        for &j in &geo.tau_a {
            if j < d || geo.eta.contains(&j) {
                continue;
            }
            let nu = &geo.nu[&j];
            let mut denom = 1.0;
            for (l, v) in &nu.nu {
                let yl = if *l < d { 1.0 } else { sub_y[l - d].norm() };
                denom *= yl.powf(rat_to_f64(v));
            }
            k_sum += sub_y[j - d].norm() / denom;
        }
        if eta_ok && k_sum < cos_theta {
            return Ok((checked, Certification::Extended));
        }
    }
    Err(Error::DivergentConfiguration { failing })
}
