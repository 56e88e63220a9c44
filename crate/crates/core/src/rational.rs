//! Exact rationals and reals split into an exact part plus a float remainder.

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedDiv, CheckedMul, One, Signed, ToPrimitive, Zero};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

/// Floor of a rational, as an integer.
pub fn rat_floor(r: &Rational) -> i64 {
    r.numer().div_floor(r.denom())
}

/// `r mod m` with result in `[0, m)`.
pub fn rat_rem_euclid(r: &Rational, m: &Rational) -> Rational {
    let k = rat_floor(&(r / m));
    r - m * Rational::from_integer(k)
}

/// Parse `"p/q"`, an integer, or a finite decimal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().ok()?;
        let d: i64 = d.trim().parse().ok()?;
        if d == 0 {
            return None;
        }
        return Some(Rational::new(n, d));
    }
    if let Ok(n) = s.parse::<i64>() {
        return Some(Rational::from_integer(n));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mut num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i32;
    let ten = Rational::from_integer(10);
    let mut r = Rational::from_integer(num);
    if scale >= 0 {
        for _ in 0..scale {
            r = r.checked_mul(&ten)?;
        }
    } else {
        for _ in 0..(-scale) {
            r = r.checked_div(&ten)?;
        }
    }
    Some(r)
}

/// A real number `exact + approx`. Used for angles measured in units of pi,
/// so that sector and interval tests on rational angles are decided exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedReal {
    pub exact: Rational,
    pub approx: f64,
}

impl MixedReal {
    pub fn exact(r: Rational) -> Self {
        MixedReal { exact: r, approx: 0.0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self::exact(Rational::from_integer(n))
    }

    pub fn from_f64(x: f64) -> Self {
        MixedReal {
            exact: Rational::zero(),
            approx: x,
        }
    }

    pub fn zero() -> Self {
        Self::exact(Rational::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.approx == 0.0
    }

    pub fn value(&self) -> f64 {
        rat_to_f64(&self.exact) + self.approx
    }

    pub fn scale(&self, r: &Rational) -> Self {
        MixedReal {
            exact: self.exact * r,
            approx: self.approx * rat_to_f64(r),
        }
    }

    /// Representative of `self mod m` in `[0, m)`.
    pub fn rem_euclid(&self, m: &Rational) -> Self {
        let e = rat_rem_euclid(&self.exact, m);
        if self.is_exact() {
            return Self::exact(e);
        }
        let mf = rat_to_f64(m);
        let total = rat_to_f64(&e) + self.approx;
        let k = (total / mf).floor();
        MixedReal {
            exact: e,
            approx: self.approx - k * mf,
        }
    }

    /// Compare with a rational, exactly when `self` is exact.
    pub fn cmp_rational(&self, r: &Rational) -> std::cmp::Ordering {
        if self.is_exact() {
            self.exact.cmp(r)
        } else {
            let diff = rat_to_f64(&(self.exact - r)) + self.approx;
            diff.partial_cmp(&0.0).unwrap_or(std::cmp::Ordering::Equal)
        }
    }
}

impl Add for MixedReal {
    type Output = MixedReal;
    fn add(self, o: MixedReal) -> MixedReal {
        MixedReal {
            exact: self.exact + o.exact,
            approx: self.approx + o.approx,
        }
    }
}

impl Sub for MixedReal {
    type Output = MixedReal;
    fn sub(self, o: MixedReal) -> MixedReal {
        MixedReal {
            exact: self.exact - o.exact,
            approx: self.approx - o.approx,
        }
    }
}

impl Neg for MixedReal {
    type Output = MixedReal;
    fn neg(self) -> MixedReal {
        MixedReal {
            exact: -self.exact,
            approx: -self.approx,
        }
    }
}

impl Mul<Rational> for MixedReal {
    type Output = MixedReal;
    fn mul(self, r: Rational) -> MixedReal {
        self.scale(&r)
    }
}

impl fmt::Display for MixedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", self.exact)
        } else if self.exact.is_zero() {
            write!(f, "{}", self.approx)
        } else {
            write!(f, "{}{:+}", self.exact, self.approx)
        }
    }
}

/// `<u, v>` for a rational vector and an angle vector.
pub fn dot_mixed(u: &[Rational], v: &[MixedReal]) -> MixedReal {
    u.iter()
        .zip(v)
        .fold(MixedReal::zero(), |acc, (a, b)| acc + b.scale(a))
}

/// `exp(i pi r)`, exact for multiples of 1/2 and reduced mod 2 otherwise.
pub fn phase_pi(r: &Rational) -> Complex64 {
    let two = Rational::from_integer(2);
    let t = rat_rem_euclid(r, &two);
    if t.denom().is_one() || *t.denom() == 2 {
        let quarter = (t * Rational::from_integer(2)).to_integer();
        return match quarter {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    phase_pi_f64(rat_to_f64(&t))
}

/// `exp(i pi x)` with the argument reduced mod 2 before scaling.
pub fn phase_pi_f64(x: f64) -> Complex64 {
    let t = x.rem_euclid(2.0);
    let (s, c) = (PI * t).sin_cos();
    Complex64::new(c, s)
}

pub fn phase_mixed(m: &MixedReal) -> Complex64 {
    if m.is_exact() {
        phase_pi(&m.exact)
    } else {
        phase_pi(&m.exact) * phase_pi_f64(m.approx)
    }
}

/// Principal argument of `z` divided by pi, exact on the axes.
pub fn arg_over_pi(z: Complex64) -> MixedReal {
    if z.im == 0.0 {
        if z.re > 0.0 {
            return MixedReal::zero();
        }
        if z.re < 0.0 {
            return MixedReal::from_int(1);
        }
    }
    if z.re == 0.0 {
        if z.im > 0.0 {
            return MixedReal::exact(rat(1, 2));
        }
        if z.im < 0.0 {
            return MixedReal::exact(rat(-1, 2));
        }
    }
    MixedReal::from_f64(z.arg() / PI)
}

pub fn l1_norm(v: &[Rational]) -> Rational {
    v.iter().fold(Rational::zero(), |acc, x| acc + x.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rational("7"), Some(rat(7, 1)));
        assert_eq!(parse_rational("1.5e1"), Some(rat(15, 1)));
        assert_eq!(parse_rational("2e-2"), Some(rat(1, 50)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }

    #[test]
    fn exact_quadrant_phases() {
        assert_eq!(phase_pi(&rat(1, 2)), Complex64::new(0.0, 1.0));
        assert_eq!(phase_pi(&rat(-1, 1)), Complex64::new(-1.0, 0.0));
        assert_eq!(phase_pi(&rat(7, 2)), Complex64::new(0.0, -1.0));
        let p = phase_pi(&rat(1, 3));
        assert!((p - Complex64::new(0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn mixed_rem_euclid_stays_in_range() {
        let m = MixedReal {
            exact: rat(5, 2),
            approx: -0.75,
        };
        let r = m.rem_euclid(&rat(2, 1));
        assert!((r.value() - 1.75).abs() < 1e-15);
        let r = MixedReal::exact(rat(-1, 3)).rem_euclid(&rat(2, 1));
        assert_eq!(r.exact, rat(5, 3));
    }

    #[test]
    fn axis_arguments_are_exact() {
        assert_eq!(arg_over_pi(Complex64::new(-2.0, 0.0)).exact, rat(1, 1));
        assert_eq!(arg_over_pi(Complex64::new(0.0, -1.0)).exact, rat(-1, 2));
        assert!(!arg_over_pi(Complex64::new(1.0, 1.0)).is_exact());
    }
}
