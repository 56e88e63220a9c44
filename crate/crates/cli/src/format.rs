//! Number formatting shared by problem files and reports.

use gkz_core::rational::{arg_over_pi, MixedReal, Rational};
use num_complex::Complex64;
use serde_json::{json, Value};

/// Decimal string with 17 significant digits; parses back to the same `f64`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    format!("{x:.16e}")
}

pub fn real(x: f64) -> Value {
    Value::String(num(x))
}

pub fn rational(r: &Rational) -> Value {
    Value::String(r.to_string())
}

pub fn rationals(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rational).collect())
}

pub fn mixed(m: &MixedReal) -> Value {
    if m.is_exact() {
        json!({ "exact": m.exact.to_string() })
    } else {
        json!({ "exact": m.exact.to_string(), "approx": num(m.approx), "value": num(m.value()) })
    }
}

/// `{re, im}` with the modulus and principal argument alongside.
pub fn complex(z: Complex64) -> Value {
    json!({
        "re": num(z.re),
        "im": num(z.im),
        "abs": num(z.norm()),
        "arg_over_pi": num(arg_over_pi(z).value()),
    })
}

pub fn complexes(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|&z| complex(z)).collect())
}

pub fn multi_index(q: &[u64]) -> String {
    let parts: Vec<String> = q.iter().map(u64::to_string).collect();
    format!("({})", parts.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [1.0 / 3.0, -2.0f64.sqrt(), 1e-300, 6.02214076e23, f64::MIN_POSITIVE, -0.0, 0.0] {
            let s = num(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }
}
