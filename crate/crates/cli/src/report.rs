//! Machine-readable reports.

use crate::error::{CliError, EXIT_FAILED_CHECKS, EXIT_PASS};
use crate::format::{num, rational, rationals};
use gkz_core::geometry::{AssumptionReport, ColumnRole};
use serde_json::{json, Map, Value};

pub const REPORT_SCHEMA: &str = "gkz-asym-report/1";

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value < threshold`.
    pub fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            pass: value < threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: None,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            pass: value >= threshold,
            value: Some(value),
            threshold: Some(threshold),
            detail: None,
        }
    }

    pub fn flag(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass,
            value: None,
            threshold: None,
            detail: Some(detail.into()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("pass".into(), json!(self.pass));
        if let Some(v) = self.value {
            m.insert("value".into(), json!(num(v)));
        }
        if let Some(t) = self.threshold {
            m.insert("threshold".into(), json!(num(t)));
        }
        if let Some(d) = &self.detail {
            m.insert("detail".into(), json!(d));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub timings: Option<Value>,
    pub error: Option<(CliErrorInfo, i32)>,
}

#[derive(Clone, Debug)]
pub struct CliErrorInfo {
    pub kind: &'static str,
    pub message: String,
    pub diagnostics: Option<Value>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    pub fn exit_code(&self) -> i32 {
        match &self.error {
            Some((_, code)) => *code,
            None if self.passed() => EXIT_PASS,
            None => EXIT_FAILED_CHECKS,
        }
    }

    pub fn set_error(&mut self, e: &CliError) {
        let diagnostics = match e {
            CliError::Assumption(r) => Some(assumption_json(r)),
            _ => None,
        };
        self.error = Some((
            CliErrorInfo {
                kind: e.kind(),
                message: e.to_string(),
                diagnostics,
            },
            e.exit_code(),
        ));
    }

    pub fn to_json(&self) -> Value {
        let status = match (&self.error, self.passed()) {
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        let mut m = Map::new();
        m.insert("schema".into(), json!(REPORT_SCHEMA));
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(status));
        m.insert("exit_code".into(), json!(self.exit_code()));
        m.insert("inputs".into(), self.inputs.clone());
        m.insert("results".into(), self.results.clone());
        m.insert("checks".into(), Value::Array(self.checks.iter().map(Check::to_json).collect()));
        if let Some((info, _)) = &self.error {
            let mut e = Map::new();
            e.insert("kind".into(), json!(info.kind));
            e.insert("message".into(), json!(info.message));
            if let Some(d) = &info.diagnostics {
                e.insert("diagnostics".into(), d.clone());
            }
            m.insert("error".into(), Value::Object(e));
        }
        if let Some(t) = &self.timings {
            m.insert("timings".into(), t.clone());
        }
        Value::Object(m)
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn assumption_json(r: &AssumptionReport) -> Value {
    let columns: Vec<Value> = r
        .columns
        .iter()
        .map(|c| {
            json!({
                "column": c.column,
                "role": match c.role {
                    ColumnRole::Simplex => "simplex",
                    ColumnRole::Interior => "interior",
                    ColumnRole::Outer => "outer",
                },
                "coords": rationals(&c.coords),
                "coord_sum": rational(&c.coord_sum),
                "ok": c.ok,
                "reason": c.reason,
            })
        })
        .collect();
    json!({ "ok": r.ok, "columns": columns, "note": r.note })
}
