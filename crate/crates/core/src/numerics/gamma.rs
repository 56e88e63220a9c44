//! Complex log-Gamma: Lanczos approximation (g = 607/128, 15 terms) with the
//! reflection formula on the left half-plane.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor()
}

/// Lanczos sum for `Re z >= 1/2`, correct modulo `2 pi i`.
fn lanczos_raw(z: Complex64) -> Complex64 {
    let mut ser = Complex64::new(LANCZOS[0], 0.0);
    for (j, c) in LANCZOS.iter().enumerate().skip(1) {
        ser += c / (z + j as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (z + 0.5) * t.ln() - t + LN_SQRT_2PI + ser.ln() - z.ln()
}

/// Stirling's leading terms; accurate to well under `pi` for `Re z >= 1/2`,
/// used only to pick the principal branch.
fn stirling(z: Complex64) -> Complex64 {
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + 1.0 / (12.0 * z)
}

fn snap_branch(raw: Complex64, reference: Complex64) -> Complex64 {
    let k = ((reference.im - raw.im) / (2.0 * PI)).round();
    raw + Complex64::new(0.0, 2.0 * PI * k)
}

fn log_gamma_right(z: Complex64) -> Complex64 {
    snap_branch(lanczos_raw(z), stirling(z))
}

/// `ln sin(pi z)` modulo `2 pi i`, without overflow for large `|Im z|`.
fn log_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return log_sin_pi(z.conj()).conj();
    }
    let i = Complex64::new(0.0, 1.0);
    let e = (2.0 * PI * i * z).exp();
    -PI * i * z + (Complex64::new(1.0, 0.0) - e).ln() + Complex64::new(0.5f64.ln(), PI / 2.0)
}

/// Principal branch of `ln Gamma(z)`: continuous off the negative real axis,
/// real on the positive axis; on the negative axis the limit from above.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidInput(format!("log_gamma of non-finite {z}")));
    }
    if is_pole(z) {
        return Err(Error::PoleAtNonpositiveInteger(z.re));
    }
    if z.re >= 0.5 {
        return Ok(log_gamma_right(z));
    }
    let raw = Complex64::new(PI.ln(), 0.0) - log_sin_pi(z) - log_gamma_right(1.0 - z);
    // branch reference from the shift recurrence
    let n = (0.5 - z.re).ceil() as usize;
    let mut reference = log_gamma_right(z + n as f64);
    for k in 0..n {
        let w = z + k as f64;
        let w = if w.im == 0.0 { Complex64::new(w.re, 0.0) } else { w };
        reference -= w.ln();
    }
    Ok(snap_branch(raw, reference))
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(log_gamma(z)?.exp())
}

/// `ln m!`.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 2 {
        return 0.0;
    }
    log_gamma_right(Complex64::new(m as f64 + 1.0, 0.0)).re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn half_integers() {
        let sqrt_pi = PI.sqrt();
        assert!((log_gamma(c(0.5, 0.0)).unwrap() - c(sqrt_pi.ln(), 0.0)).norm() < 1e-14);
        assert!((log_gamma(c(2.5, 0.0)).unwrap() - c((0.75 * sqrt_pi).ln(), 0.0)).norm() < 1e-14);
        assert!((gamma(c(-0.5, 0.0)).unwrap() - c(-2.0 * sqrt_pi, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn frozen_high_precision_values() {
        // mpmath.loggamma at 30 digits
        let cases = [
            (c(1.0, 1.0), c(-0.650_923_199_301_856_3, -0.301_640_320_467_533_2)),
            (c(-2.3, 0.7), c(-1.266_429_485_193_089_4, -8.076_782_366_712_056)),
            (c(3.0, -10.0), c(-9.007_976_480_255_955, -16.647_441_415_478_651)),
            (c(-0.5, 0.0), c(1.265_512_123_484_645_4, -PI)),
            (c(-2.5, 0.0), c(-0.056_243_716_497_674_05, -3.0 * PI)),
            (c(20.0, 5.0), c(38.705_835_948_079_529, 14.906_326_673_515_808)),
        ];
        for (z, want) in cases {
            let got = log_gamma(z).unwrap();
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0), "{z}: {got} vs {want}");
        }
    }

    #[test]
    fn poles_rejected() {
        assert_eq!(log_gamma(c(0.0, 0.0)), Err(Error::PoleAtNonpositiveInteger(0.0)));
        assert_eq!(log_gamma(c(-3.0, 0.0)), Err(Error::PoleAtNonpositiveInteger(-3.0)));
        assert!(log_gamma(c(-3.0, 1e-9)).is_ok());
    }

    #[test]
    fn factorials() {
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-13);
        assert_eq!(ln_factorial(0), 0.0);
    }
}
