//! The `gkz-asym/1` problem file.

use crate::error::CliError;
use crate::format::num;
use gkz_core::exact_lattice::IntMatrix;
use gkz_core::geometry::validate_assumption_b;
use gkz_core::rational::{parse_rational, MixedReal, Rational};
use gkz_core::solver::ToricProblem;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA: &str = "gkz-asym/1";

/// A real number written either as a decimal string or as a bare JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Text(String),
    Float(f64),
}

impl Number {
    fn to_f64(&self, context: &str) -> Result<f64, CliError> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => parse_real(s).ok_or_else(|| CliError::parse(context, format!("not a number: {s:?}"))),
        }
    }

    /// Strings are read exactly when they are rationals or finite decimals;
    /// bare JSON numbers are taken as floating point.
    fn to_mixed(&self, context: &str) -> Result<MixedReal, CliError> {
        match self {
            Number::Float(x) => Ok(MixedReal::from_f64(*x)),
            Number::Text(s) => parse_rational(s)
                .map(MixedReal::exact)
                .ok_or_else(|| CliError::parse(context, format!("not a rational: {s:?}"))),
        }
    }
}

fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Some(x);
    }
    parse_rational(s).map(|r| gkz_core::rational::rat_to_f64(&r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArgEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg_over_pi: Option<String>,
    /// Inexact remainder of the argument, in units of pi.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg_over_pi_f64: Option<Number>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexEntry {
    pub re: Number,
    pub im: Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg: Option<ArgEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaEntry {
    Keyword(String),
    Values(Vec<Number>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_levels: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: String,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    pub sigma: Vec<usize>,
    pub gamma: Vec<ComplexEntry>,
    pub x: Vec<ComplexEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<DeltaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaChoice {
    Auto,
    Values(Vec<MixedReal>),
}

/// Optional settings carried by the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FileSettings {
    pub p: Option<Vec<i64>>,
    pub delta: Option<DeltaChoice>,
    pub epsilon: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_levels: Option<usize>,
}

pub fn parse_delta(s: &str) -> Result<DeltaChoice, CliError> {
    if s.trim() == "auto" {
        return Ok(DeltaChoice::Auto);
    }
    split_list(s)
        .iter()
        .enumerate()
        .map(|(i, t)| Number::Text(t.to_string()).to_mixed(&format!("delta[{i}]")))
        .collect::<Result<Vec<_>, _>>()
        .map(DeltaChoice::Values)
}

pub fn parse_p(s: &str) -> Result<Vec<i64>, CliError> {
    split_list(s)
        .iter()
        .enumerate()
        .map(|(i, t)| t.parse().map_err(|e| CliError::parse(format!("p[{i}]"), e)))
        .collect()
}

fn split_list(s: &str) -> Vec<&str> {
    s.trim()
        .trim_start_matches('[')
        .trim_end_matches(']')
        .split([',', ' '])
        .map(|t| t.trim().trim_matches('"'))
        .filter(|t| !t.is_empty())
        .collect()
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error(&e))?;
        match value.get("schema") {
            Some(serde_json::Value::String(s)) if s == SCHEMA => {}
            Some(other) => {
                return Err(CliError::SchemaVersionMismatch {
                    expected: SCHEMA,
                    found: other.as_str().map(str::to_string).unwrap_or_else(|| other.to_string()),
                })
            }
            None => return Err(CliError::parse("schema", "missing field")),
        }
        serde_json::from_str(text).map_err(|e| json_error(&e))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem file serializes");
        s.push('\n');
        s
    }

    pub fn matrix(&self) -> Result<IntMatrix, CliError> {
        IntMatrix::from_rows(&self.b).map_err(|e| CliError::parse("B", e))
    }

    /// Builds the validated problem. Assumption failures are reported apart
    /// from malformed input.
    pub fn to_problem(&self) -> Result<ToricProblem, CliError> {
        let b = self.matrix()?;
        let (d, n) = (b.rows(), b.cols());
        if self.sigma.len() != d {
            return Err(CliError::parse("sigma", format!("expected {d} simplex columns, got {}", self.sigma.len())));
        }
        if let Some(k) = self.sigma.iter().position(|&s| s >= n) {
            return Err(CliError::parse(format!("sigma[{k}]"), format!("column {} out of range", self.sigma[k])));
        }
        if self.gamma.len() != d {
            return Err(CliError::parse("gamma", format!("expected {d} entries, got {}", self.gamma.len())));
        }
        if self.x.len() != n {
            return Err(CliError::parse("x", format!("expected {n} entries, got {}", self.x.len())));
        }
        let gamma = self
            .gamma
            .iter()
            .enumerate()
            .map(|(i, g)| complex(g, &format!("gamma[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut x = Vec::with_capacity(n);
        let mut x_arg = Vec::with_capacity(n);
        for (i, e) in self.x.iter().enumerate() {
            let ctx = format!("x[{i}]");
            let z = complex(e, &ctx)?;
            let arg = e.arg.as_ref().map(|a| arg_value(a, &format!("{ctx}.arg"))).transpose()?;
            if self.sigma.contains(&i) {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(CliError::parse(&ctx, "simplex coordinate must be nonzero"));
                }
                if arg.is_none() {
                    return Err(CliError::parse(&ctx, "simplex coordinate needs an explicit arg"));
                }
            }
            x.push(z);
            x_arg.push(arg);
        }
        let report = validate_assumption_b(&b, &self.sigma);
        if !report.ok {
            return Err(CliError::Assumption(Box::new(report)));
        }
        Ok(ToricProblem::new(b, self.sigma.clone(), gamma, x, x_arg)?)
    }

    pub fn settings(&self) -> Result<FileSettings, CliError> {
        let delta = match &self.delta {
            None => None,
            Some(DeltaEntry::Keyword(k)) if k == "auto" => Some(DeltaChoice::Auto),
            Some(DeltaEntry::Keyword(k)) => return Err(CliError::parse("delta", format!("expected \"auto\" or a list, got {k:?}"))),
            Some(DeltaEntry::Values(v)) => Some(DeltaChoice::Values(
                v.iter()
                    .enumerate()
                    .map(|(i, x)| x.to_mixed(&format!("delta[{i}]")))
                    .collect::<Result<_, _>>()?,
            )),
        };
        let tol = self.tolerances.clone().unwrap_or_default();
        Ok(FileSettings {
            p: self.p.clone(),
            delta,
            epsilon: self.epsilon.as_ref().map(|e| e.to_f64("epsilon")).transpose()?,
            rel_tol: tol.rel_tol.as_ref().map(|e| e.to_f64("tolerances.rel_tol")).transpose()?,
            abs_tol: tol.abs_tol.as_ref().map(|e| e.to_f64("tolerances.abs_tol")).transpose()?,
            max_levels: tol.max_levels,
        })
    }

    /// File describing `tp` exactly, with no optional settings.
    pub fn from_problem(tp: &ToricProblem) -> Self {
        let entry = |z: Complex64, arg: Option<&MixedReal>| ComplexEntry {
            re: Number::Text(num(z.re)),
            im: Number::Text(num(z.im)),
            arg: arg.map(|a| ArgEntry {
                arg_over_pi: (a.exact != Rational::from_integer(0) || a.is_exact()).then(|| a.exact.to_string()),
                arg_over_pi_f64: (!a.is_exact()).then(|| Number::Text(num(a.approx))),
            }),
        };
        ProblemFile {
            schema: SCHEMA.to_string(),
            b: tp.b.to_rows(),
            sigma: tp.sigma.clone(),
            gamma: tp.gamma.iter().map(|&g| entry(g, None)).collect(),
            x: tp.x.iter().zip(&tp.x_arg).map(|(&z, a)| entry(z, a.as_ref())).collect(),
            p: None,
            delta: None,
            epsilon: None,
            tolerances: None,
        }
    }
}

fn complex(e: &ComplexEntry, ctx: &str) -> Result<Complex64, CliError> {
    Ok(Complex64::new(e.re.to_f64(&format!("{ctx}.re"))?, e.im.to_f64(&format!("{ctx}.im"))?))
}

fn arg_value(a: &ArgEntry, ctx: &str) -> Result<MixedReal, CliError> {
    if a.arg_over_pi.is_none() && a.arg_over_pi_f64.is_none() {
        return Err(CliError::parse(ctx, "empty arg"));
    }
    let exact = match &a.arg_over_pi {
        Some(s) => parse_rational(s).ok_or_else(|| CliError::parse(format!("{ctx}.arg_over_pi"), format!("not a rational: {s:?}")))?,
        None => Rational::from_integer(0),
    };
    let approx = match &a.arg_over_pi_f64 {
        Some(v) => v.to_f64(&format!("{ctx}.arg_over_pi_f64"))?,
        None => 0.0,
    };
    Ok(MixedReal { exact, approx })
}

fn json_error(e: &serde_json::Error) -> CliError {
    CliError::parse(format!("line {} column {}", e.line(), e.column()), e)
}

pub fn read_problem(path: &Path) -> Result<ProblemFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ProblemFile::from_json(&text)
}

pub fn load_problem(path: &Path) -> Result<ToricProblem, CliError> {
    read_problem(path)?.to_problem()
}

pub fn save_problem(path: &Path, tp: &ToricProblem) -> Result<(), CliError> {
    std::fs::write(path, ProblemFile::from_problem(tp).to_json()).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
