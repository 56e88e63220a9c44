//! Ray-product cycles `C_{p,delta}`, the choice of `delta`, and the stratified
//! rapid-decay cycle `Upsilon(epsilon)`.
//!
//! Angles are measured in units of pi and carried as [`MixedReal`].

use crate::error::{Error, Result};
use crate::exact_lattice::{IntMatrix, RatMatrix};
use crate::rational::{
    arg_over_pi, dot_mixed, l1_norm, phase_mixed, phase_pi_f64, rat, rat_to_f64, MixedReal,
    Rational,
};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::f64::consts::PI;

const DELTA_MARGIN: f64 = 1e-9;

/// The pair `(p, delta)` selecting a cycle, with the solved arguments when known.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleSpec {
    pub p: Vec<i64>,
    pub delta: Vec<MixedReal>,
    pub theta: Option<Vec<MixedReal>>,
}

impl CycleSpec {
    pub fn new(p: Vec<i64>, delta: Vec<MixedReal>) -> Result<Self> {
        if p.len() != delta.len() {
            return Err(Error::DimensionMismatch {
                what: "delta",
                expected: p.len(),
                got: delta.len(),
            });
        }
        let half = rat(1, 2);
        if let Some(k) = delta.iter().position(|dk| {
            dk.cmp_rational(&half) != Ordering::Less || dk.cmp_rational(&-half) != Ordering::Greater
        }) {
            return Err(Error::InvalidInput(format!(
                "|delta_{k}| = {} is not < 1/2",
                delta[k]
            )));
        }
        Ok(CycleSpec { p, delta, theta: None })
    }

    pub fn zero(d: usize) -> Self {
        CycleSpec {
            p: vec![0; d],
            delta: vec![MixedReal::zero(); d],
            theta: None,
        }
    }

    pub fn d(&self) -> usize {
        self.p.len()
    }

    /// `1 + 2p + delta`.
    pub fn shift(&self) -> Vec<MixedReal> {
        self.p
            .iter()
            .zip(&self.delta)
            .map(|(&p, &dk)| MixedReal::from_int(1 + 2 * p) + dk)
            .collect()
    }

    /// `<1 + 2p + delta, a>` in units of pi.
    pub fn pairing(&self, a: &[Rational]) -> MixedReal {
        dot_mixed(a, &self.shift())
    }

    /// `exp(i pi <1 + 2p + delta, a>)`.
    pub fn twist(&self, a: &[Rational]) -> Complex64 {
        phase_mixed(&self.pairing(a))
    }

    /// `exp(-i pi <1 + 2p + delta, beta>)`.
    pub fn phase_beta(&self, beta: &[Complex64]) -> Complex64 {
        let s: Vec<f64> = self.shift().iter().map(|m| m.value()).collect();
        let re: f64 = s.iter().zip(beta).map(|(s, b)| s * b.re).sum();
        let im: f64 = s.iter().zip(beta).map(|(s, b)| s * b.im).sum();
        phase_pi_f64(-re) * (PI * im).exp()
    }

    /// `exp(i pi delta_k)`, the rotation of the k-th ray.
    pub fn ray_phase(&self, k: usize) -> Complex64 {
        phase_mixed(&self.delta[k])
    }
}

/// Open interval `(1/2, 3/2) + 2Z`, in units of pi.
pub fn in_theta(v: &MixedReal) -> bool {
    let w = v.rem_euclid(&rat(2, 1));
    w.cmp_rational(&rat(1, 2)) == Ordering::Greater && w.cmp_rational(&rat(3, 2)) == Ordering::Less
}

/// `theta / pi = (tB_sigma)^{-1} (-arg x_sigma / pi + 1 + delta + 2p)`.
pub fn solve_theta(
    b: &IntMatrix,
    sigma: &[usize],
    arg_x: &[MixedReal],
    p: &[i64],
    delta: &[MixedReal],
) -> Result<Vec<MixedReal>> {
    let bt_inv = b.select_columns(sigma).transpose().to_rational().inverse()?;
    let rhs: Vec<MixedReal> = (0..sigma.len())
        .map(|k| MixedReal::from_int(1 + 2 * p[k]) + delta[k] - arg_x[k])
        .collect();
    Ok((0..sigma.len()).map(|i| dot_mixed(&bt_inv.row(i), &rhs)).collect())
}

/// Uniform `delta` placing `arg y_n` as close to the centre of the sector as
/// `|delta_k| < 1/2` allows.
pub fn choose_delta(a_n: &[Rational], p: &[i64], arg_yn: MixedReal) -> Result<Vec<MixedReal>> {
    let norm = l1_norm(a_n);
    if norm <= Rational::one() {
        return Err(Error::NoAdmissibleDelta(norm.to_string()));
    }
    let two = rat(2, 1);
    let base: Rational = a_n
        .iter()
        .zip(p)
        .map(|(a, &pk)| a * Rational::from_integer(1 + 2 * pk))
        .sum();
    let c = (MixedReal::from_int(1) - arg_yn - MixedReal::exact(base)).rem_euclid(&two);
    let c_star = if c.cmp_rational(&Rational::one()) == Ordering::Greater {
        c - MixedReal::exact(two)
    } else {
        c
    };
    let half_norm = norm / two;
    let fits = |v: &MixedReal| v.value().abs() < rat_to_f64(&half_norm) * (1.0 - 2.0 * DELTA_MARGIN);
    let target = if fits(&c_star) {
        c_star
    } else {
        // overlap of (c* + 2k - 1/2, c* + 2k + 1/2) with (-|a|/2, |a|/2)
        let half = MixedReal::exact(rat(1, 2));
        let mut best: Option<(f64, MixedReal)> = None;
        for k in -2i64..=2 {
            let centre = c_star + MixedReal::from_int(2 * k);
            let lo = centre - half;
            let hi = centre + half;
            let lo = if lo.cmp_rational(&-half_norm) == Ordering::Less {
                MixedReal::exact(-half_norm)
            } else {
                lo
            };
            let hi = if hi.cmp_rational(&half_norm) == Ordering::Greater {
                MixedReal::exact(half_norm)
            } else {
                hi
            };
            let len = (hi - lo).value();
            if len <= 0.0 {
                continue;
            }
            let mid = (lo + hi).scale(&rat(1, 2));
            let better = match &best {
                None => true,
                Some((bl, bm)) => {
                    len > bl + 1e-15 || ((len - bl).abs() <= 1e-15 && mid.value().abs() < bm.value().abs())
                }
            };
            if better {
                best = Some((len, mid));
            }
        }
        best.map(|b| b.1).ok_or_else(|| Error::NoAdmissibleDelta(norm.to_string()))?
    };
    let dk = target.scale(&norm.recip());
    Ok(vec![dk; a_n.len()])
}

/// Open arc of `arg y_n` (units of pi) on which the outer column's condition holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    /// Centre in `[0, 2)`.
    pub center: MixedReal,
    pub half_width: Rational,
}

impl Sector {
    pub fn contains(&self, arg: &MixedReal) -> bool {
        let w = (*arg - self.center + MixedReal::exact(self.half_width)).rem_euclid(&rat(2, 1));
        w.cmp_rational(&Rational::zero()) == Ordering::Greater
            && w.cmp_rational(&(self.half_width * rat(2, 1))) == Ordering::Less
    }
}

pub fn sector_of(a_n: &[Rational], p: &[i64], delta: &[MixedReal]) -> Sector {
    let shift: Vec<MixedReal> = p
        .iter()
        .zip(delta)
        .map(|(&pk, &dk)| MixedReal::from_int(1 + 2 * pk) + dk)
        .collect();
    let center = (MixedReal::from_int(1) - dot_mixed(a_n, &shift)).rem_euclid(&rat(2, 1));
    Sector {
        center,
        half_width: rat(1, 2),
    }
}

/// `arg y_l + <1 + delta + 2p, a(l)> pi` lies in `(pi/2, 3pi/2) + 2 pi Z`.
/// `y` holds the non-simplex coordinates `y_d, ..., y_{n-1}`; simplex
/// coordinates are 1.
pub fn check_condition(ell: usize, a: &RatMatrix, y: &[Complex64], spec: &CycleSpec) -> Result<bool> {
    let d = a.rows();
    let arg = if ell < d {
        MixedReal::zero()
    } else {
        let yl = y[ell - d];
        if yl == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroCoordinate(ell));
        }
        arg_over_pi(yl)
    };
    Ok(in_theta(&(arg + spec.pairing(&a.column(ell)))))
}

/// Same test with an explicitly supplied argument of `y_l`.
pub fn check_condition_arg(ell: usize, a: &RatMatrix, arg_y: MixedReal, spec: &CycleSpec) -> bool {
    in_theta(&(arg_y + spec.pairing(&a.column(ell))))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Winding {
    /// Circles run clockwise; the second ray sits at argument `-2 q_k pi`.
    #[default]
    Negative,
    Positive,
}

impl Winding {
    pub fn sign(self) -> f64 {
        match self {
            Winding::Negative => -1.0,
            Winding::Positive => 1.0,
        }
    }
}

/// One parametrised piece: angles `theta_j` in `[0, 2 q_j pi]` for `j` in
/// `eta`, radii `r_k` for `k` in `tau` on rays selected by `xi`.
#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonPiece {
    pub eta: Vec<usize>,
    pub tau: Vec<usize>,
    pub xi: Vec<u8>,
    /// `(j, length)` per angle coordinate.
    pub angle_box: Vec<(usize, f64)>,
    pub orientation: i8,
}

impl UpsilonPiece {
    pub fn dimension(&self) -> usize {
        self.eta.len() + self.tau.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpsilonCycle {
    pub epsilon: f64,
    /// Exponent vector `a = a(n)`.
    pub a: Vec<Rational>,
    pub q: Vec<i64>,
    pub winding: Winding,
    pub pieces: Vec<UpsilonPiece>,
}

/// Sign of the permutation listing `eta` then `tau`.
pub fn signature(eta: &[usize], tau: &[usize]) -> i8 {
    let seq: Vec<usize> = eta.iter().chain(tau).copied().collect();
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn upsilon_strata(epsilon: f64, a: &RatMatrix, q: &[i64]) -> Result<UpsilonCycle> {
    upsilon_strata_with(epsilon, a, q, Winding::default())
}

pub fn upsilon_strata_with(epsilon: f64, a: &RatMatrix, q: &[i64], winding: Winding) -> Result<UpsilonCycle> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::DegenerateEpsilon(epsilon));
    }
    let d = a.rows();
    let a_n = a.column(a.cols() - 1);
    if a_n.iter().any(|x| !x.is_positive()) {
        return Err(Error::InvalidInput("a(n) must be strictly positive".into()));
    }
    let mut pieces = Vec::new();
    for mask in 0u32..(1 << d) {
        let eta: Vec<usize> = (0..d).filter(|k| mask & (1 << k) != 0).collect();
        let tau: Vec<usize> = (0..d).filter(|k| mask & (1 << k) == 0).collect();
        let sig = signature(&eta, &tau);
        for xmask in 0u32..(1 << tau.len()) {
            let xi: Vec<u8> = (0..tau.len()).map(|i| ((xmask >> i) & 1) as u8).collect();
            let ones: usize = xi.iter().map(|&x| x as usize).sum();
            let parity = if (tau.len() - ones) % 2 == 0 { 1 } else { -1 };
            pieces.push(UpsilonPiece {
                angle_box: eta.iter().map(|&j| (j, 2.0 * PI * q[j] as f64)).collect(),
                eta: eta.clone(),
                tau: tau.clone(),
                xi,
                orientation: sig * parity,
            });
        }
    }
    Ok(UpsilonCycle {
        epsilon,
        a: a_n,
        q: q.to_vec(),
        winding,
        pieces,
    })
}

impl UpsilonCycle {
    pub fn d(&self) -> usize {
        self.a.len()
    }

    fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(rat_to_f64).collect()
    }

    /// `|a| ln epsilon`, the log of the level `epsilon^{|a|}`.
    pub fn log_level(&self) -> f64 {
        rat_to_f64(&l1_norm(&self.a)) * self.epsilon.ln()
    }

    /// `ln rho` on stratum `eta` given `ln r_k` for `k` in `tau`.
    pub fn log_rho(&self, eta: &[usize], tau: &[usize], ln_r_tau: &[f64]) -> Result<f64> {
        let a = self.a_f64();
        let s: f64 = eta.iter().map(|&j| a[j]).sum();
        if s <= 0.0 {
            return Err(Error::ImplicitSolveFailure);
        }
        let rest: f64 = tau.iter().zip(ln_r_tau).map(|(&k, l)| a[k] * l).sum();
        let v = (self.log_level() - rest) / s;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ImplicitSolveFailure)
        }
    }

    /// Whether `r_tau` lies in the radial region `U_eta`.
    pub fn in_region(&self, eta: &[usize], tau: &[usize], ln_r_tau: &[f64]) -> bool {
        let a = self.a_f64();
        let total: f64 = tau.iter().zip(ln_r_tau).map(|(&k, l)| a[k] * l).sum();
        if eta.is_empty() {
            return total > self.log_level();
        }
        let s: f64 = eta.iter().map(|&j| a[j]).sum();
        ln_r_tau.iter().all(|l| s * l + total > self.log_level())
    }

    /// Stratum containing `r` (given as logs), or `None` below the level set.
    /// Points on the level set are assigned the set of coordinates attaining
    /// the minimum, compared with relative tolerance `tol`.
    pub fn stratum_of(&self, ln_r: &[f64], tol: f64) -> Option<Vec<usize>> {
        let a = self.a_f64();
        let total: f64 = a.iter().zip(ln_r).map(|(a, l)| a * l).sum();
        let level = self.log_level();
        let scale = tol * (1.0 + level.abs());
        if total > level + scale {
            return Some(vec![]);
        }
        if total < level - scale {
            return None;
        }
        let m = ln_r.iter().cloned().fold(f64::INFINITY, f64::min);
        Some((0..ln_r.len()).filter(|&k| (ln_r[k] - m).abs() <= scale).collect())
    }

    /// `(-1)^{|tau| - |xi|} (i w)^{|eta|}`, the product of the piece orientation,
    /// the coordinate-order signature and the angle Jacobian.
    pub fn piece_factor(&self, piece: &UpsilonPiece) -> Complex64 {
        let sig = signature(&piece.eta, &piece.tau);
        let iw = Complex64::new(0.0, self.winding.sign());
        let mut f = Complex64::new((piece.orientation * sig) as f64, 0.0);
        for _ in 0..piece.eta.len() {
            f *= iw;
        }
        f
    }

    /// Argument of the ray for `k` in `tau` with ray label `xi_k`.
    pub fn ray_arg(&self, k: usize, xi: u8) -> f64 {
        self.winding.sign() * 2.0 * PI * (self.q[k] * xi as i64) as f64
    }
}

/// `prod_k (exp(-2 pi i w q_k beta_k) - 1)` relating the rapid-decay integral
/// to the ray integral for winding sign `w`.
pub fn hankel_factor(q: &[i64], beta: &[Complex64], winding: Winding) -> Complex64 {
    let w = -winding.sign();
    q.iter().zip(beta).fold(Complex64::new(1.0, 0.0), |acc, (&qk, b)| {
        let z = Complex64::new(0.0, 2.0 * PI * w * qk as f64) * b;
        let qb = qk as f64 * b;
        // exact zero at resonance
        let e = if qb.im == 0.0 && qb.re.fract() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            z.exp_m1()
        };
        acc * e
    })
}

trait ExpM1 {
    fn exp_m1(self) -> Self;
}

impl ExpM1 for Complex64 {
    fn exp_m1(self) -> Complex64 {
        // exp(z) - 1 = exp(re)(cos im - 1) + (exp(re) - 1) + i exp(re) sin im
        let er = self.re.exp();
        let half = (self.im / 2.0).sin();
        Complex64::new(self.re.exp_m1() - 2.0 * er * half * half, er * self.im.sin())
    }
}

/// `true` if some `q_k beta_k` lies within `tol` of an integer.
pub fn is_resonant(q: &[i64], beta: &[Complex64], tol: f64) -> bool {
    q.iter().zip(beta).any(|(&qk, b)| {
        let v = qk as f64 * b;
        v.im.abs() <= tol && (v.re - v.re.round()).abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[Rational]) -> RatMatrix {
        RatMatrix::from_columns(&v.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn theta_examples() {
        let b = IntMatrix::identity(2);
        let th = solve_theta(&b, &[0, 1], &[MixedReal::zero(); 2], &[0, 0], &[MixedReal::zero(); 2]).unwrap();
        assert_eq!(th, vec![MixedReal::from_int(1); 2]);
        let b = IntMatrix::from_rows(&[vec![2, 3]]).unwrap();
        let th = solve_theta(&b, &[0], &[MixedReal::zero()], &[0], &[MixedReal::zero()]).unwrap();
        assert_eq!(th[0].exact, rat(1, 2));
        let b = IntMatrix::from_rows(&[vec![2, 1], vec![0, 2]]).unwrap();
        let th = solve_theta(&b, &[0, 1], &[MixedReal::zero(); 2], &[1, 0], &[MixedReal::zero(); 2]).unwrap();
        // tB = [[2,0],[1,2]]: 2 t1 = 3, t1 + 2 t2 = 1
        assert_eq!(th[0].exact, rat(3, 2));
        assert_eq!(th[1].exact, rat(-1, 4));
    }

    #[test]
    fn delta_examples() {
        let d = choose_delta(&[rat(2, 1)], &[0], MixedReal::from_int(1)).unwrap();
        assert_eq!(d, vec![MixedReal::zero()]);
        let d = choose_delta(&[rat(3, 2)], &[0], MixedReal::zero()).unwrap();
        assert_eq!(d[0].exact, rat(-1, 3));
        let d = choose_delta(&[rat(1, 2), rat(1, 1)], &[0, 0], MixedReal::from_int(1)).unwrap();
        assert_eq!(d, vec![MixedReal::exact(rat(1, 3)); 2]);
        assert!(matches!(
            choose_delta(&[rat(1, 1)], &[0], MixedReal::zero()),
            Err(Error::NoAdmissibleDelta(_))
        ));
    }

    #[test]
    fn delta_fallback_stays_admissible() {
        // |a| = 2 with c* = 1 sits on the boundary |delta| = 1/2
        let d = choose_delta(&[rat(2, 1)], &[0], MixedReal::zero()).unwrap();
        assert!(d[0].value().abs() < 0.5 - 1e-9);
        let spec = CycleSpec::new(vec![0], d).unwrap();
        assert!(check_condition_arg(1, &col(&[rat(1, 1), rat(2, 1)]), MixedReal::zero(), &spec));
    }

    #[test]
    fn sector_examples() {
        let s = sector_of(&[rat(2, 1)], &[0], &[MixedReal::zero()]);
        assert_eq!(s.center.exact, rat(1, 1));
        assert!(s.contains(&MixedReal::from_int(1)));
        assert!(!s.contains(&MixedReal::exact(rat(1, 2))));
        assert!(!s.contains(&MixedReal::exact(rat(3, 2))));
        let s = sector_of(&[rat(3, 2)], &[0], &[MixedReal::exact(rat(-1, 3))]);
        assert_eq!(s.center.exact, rat(0, 1));
        let s2 = sector_of(&[rat(3, 2)], &[0], &[MixedReal::exact(rat(0, 1))]);
        assert_eq!((s2.center - s.center).rem_euclid(&rat(2, 1)).exact, rat(3, 2));
    }

    #[test]
    fn condition_examples() {
        let a = col(&[rat(1, 1), rat(2, 1)]);
        let spec = CycleSpec::zero(1);
        assert!(check_condition(0, &a, &[Complex64::new(-1.0, 0.0)], &spec).unwrap());
        assert!(check_condition(1, &a, &[Complex64::new(-1.0, 0.0)], &spec).unwrap());
        assert!(!check_condition(1, &a, &[Complex64::new(1.0, 0.0)], &spec).unwrap());
        assert_eq!(
            check_condition(1, &a, &[Complex64::new(0.0, 0.0)], &spec),
            Err(Error::ZeroCoordinate(1))
        );
    }

    #[test]
    fn keyhole_pieces() {
        let a = col(&[rat(1, 1), rat(3, 2)]);
        let u = upsilon_strata(0.1, &a, &[1]).unwrap();
        assert_eq!(u.pieces.len(), 3);
        let circle = u.pieces.iter().find(|p| !p.eta.is_empty()).unwrap();
        assert_eq!(circle.angle_box, vec![(0, 2.0 * PI)]);
        assert_eq!(circle.orientation, 1);
        let u = upsilon_strata(0.1, &a, &[2]).unwrap();
        let circle = u.pieces.iter().find(|p| !p.eta.is_empty()).unwrap();
        assert_eq!(circle.angle_box, vec![(0, 4.0 * PI)]);
        let rays: Vec<i8> = u.pieces.iter().filter(|p| p.eta.is_empty()).map(|p| p.orientation).collect();
        assert_eq!(rays, vec![-1, 1]);
    }

    #[test]
    fn two_dim_piece_counts() {
        let a = RatMatrix::from_columns(&[
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 2), rat(1, 1)],
        ])
        .unwrap();
        let u = upsilon_strata(0.1, &a, &[2, 1]).unwrap();
        assert_eq!(u.pieces.len(), 9);
        assert!(u.pieces.iter().all(|p| p.dimension() == 2));
        let count = |k: usize| u.pieces.iter().filter(|p| p.eta.len() == k).count();
        assert_eq!((count(0), count(1), count(2)), (4, 4, 1));
        assert_eq!(upsilon_strata(0.0, &a, &[2, 1]), Err(Error::DegenerateEpsilon(0.0)));
    }

    #[test]
    fn hankel_factor_vanishes_at_resonance() {
        let f = hankel_factor(&[2], &[Complex64::new(-0.5, 0.0)], Winding::Negative);
        assert_eq!(f, Complex64::new(0.0, 0.0));
        let b = Complex64::new(-1.0 / 3.0, 0.0);
        let f = hankel_factor(&[2], &[b], Winding::Negative);
        let want = (Complex64::new(0.0, 4.0 * PI) * b).exp() - 1.0;
        assert!((f - want).norm() < 1e-14);
        assert!(is_resonant(&[2], &[Complex64::new(0.5, 0.0)], 1e-9));
    }
}
