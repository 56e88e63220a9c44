use gkz_core::geometry::AssumptionReport;
use gkz_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILED_CHECKS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_ASSUMPTION: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },
    #[error("schema version mismatch: expected {expected}, found {found}")]
    SchemaVersionMismatch { expected: &'static str, found: String },
    #[error("assumption on B violated")]
    Assumption(Box<AssumptionReport>),
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn parse(context: impl Into<String>, message: impl ToString) -> Self {
        CliError::Parse {
            context: context.into(),
            message: message.to_string(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::SchemaVersionMismatch { .. } => "schema-version-mismatch",
            CliError::Assumption(_) => "assumption-violation",
            CliError::Core(e) => match exit_code_core(e) {
                EXIT_NO_CONVERGENCE => "non-convergence",
                EXIT_ASSUMPTION => "assumption-violation",
                EXIT_FAILED_CHECKS => "failed-check",
                _ => "input",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::SchemaVersionMismatch { .. } => EXIT_INPUT,
            CliError::Assumption(_) => EXIT_ASSUMPTION,
            CliError::Core(e) => exit_code_core(e),
        }
    }
}

fn exit_code_core(e: &CoreError) -> i32 {
    match e {
        CoreError::NoConvergence { .. } | CoreError::RecursionBudgetExceeded { .. } | CoreError::ImplicitSolveFailure => {
            EXIT_NO_CONVERGENCE
        }
        CoreError::DivergentConfiguration { .. } | CoreError::NoAdmissibleDelta(_) | CoreError::LatticeNotSaturated { .. } => {
            EXIT_ASSUMPTION
        }
        CoreError::SingularConnection { .. } => EXIT_FAILED_CHECKS,
        _ => EXIT_INPUT,
    }
}
