use clap::{Args, Parser, Subcommand, ValueEnum};
use gkz_cli::commands::{run, Command, Flags, Suite};
use gkz_cli::problem::{parse_delta, parse_p, DeltaChoice};
use gkz_core::solver::ConvergenceMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gkz-asym", version, about = "Evaluate and verify irregular GKZ integrals")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Assumption, geometry and convergence diagnostics.
    Check(Common),
    /// Basis index sets, connection matrix and Gevrey coefficient tables.
    Basis(Common),
    /// Value of the integral and of the reduced function.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Evaluate every coset representative instead of a single p.
        #[arg(long)]
        all_reps: bool,
    },
    /// Truncated expansion in the last coordinate and its remainder order.
    Expand(Common),
    /// Invariant suites with pass/fail checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Rapid-decay cycle integral against the ray integral.
    Hankel(Common),
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON, schema gkz-asym/1).
    problem: PathBuf,
    #[arg(long, default_value_t = 6)]
    order: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value = "certified")]
    mode: ModeArg,
    /// Coset representative, e.g. "0,1".
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// "auto" or a list of rationals, e.g. "1/3,-1/4".
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for CSV coefficient tables.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Worker threads for independent evaluations.
    #[arg(long)]
    jobs: Option<usize>,
    /// Serial evaluation and no timings, for byte-identical reports.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Certified,
    Extended,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Gamma,
    Contiguity,
    Continuation,
    Connection,
    Hankel,
    Expansion,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, suite, all_reps) = match cli.command {
        Cmd::Check(c) => (Command::Check, c, Suite::All, false),
        Cmd::Basis(c) => (Command::Basis, c, Suite::All, false),
        Cmd::Eval { common, all_reps } => (Command::Eval, common, Suite::All, all_reps),
        Cmd::Expand(c) => (Command::Expand, c, Suite::All, false),
        Cmd::Verify { common, suite } => (Command::Verify, common, suite.into(), false),
        Cmd::Hankel(c) => (Command::Hankel, c, Suite::All, false),
    };
    let p = common.p.as_deref().map(parse_p).transpose();
    let delta = common.delta.as_deref().map(parse_delta).transpose();
    let (p, delta): (Option<Vec<i64>>, Option<DeltaChoice>) = match (p, delta) {
        (Ok(p), Ok(d)) => (p, d),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("gkz-asym: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let flags = Flags {
        order: common.order,
        tol: common.tol,
        epsilon: common.epsilon,
        mode: match common.mode {
            ModeArg::Certified => ConvergenceMode::Certified,
            ModeArg::Extended => ConvergenceMode::Extended,
        },
        p,
        delta,
        suite,
        all_reps,
        jobs: common.jobs,
        deterministic: common.deterministic,
        csv: common.csv,
    };
    let report = run(command, &common.problem, &flags);
    let text = report.render();
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("gkz-asym: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if let Some((info, _)) = &report.error {
        eprintln!("gkz-asym: {}", info.message);
    }
    ExitCode::from(report.exit_code() as u8)
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Gamma => Suite::Gamma,
            SuiteArg::Contiguity => Suite::Contiguity,
            SuiteArg::Continuation => Suite::Continuation,
            SuiteArg::Connection => Suite::Connection,
            SuiteArg::Hankel => Suite::Hankel,
            SuiteArg::Expansion => Suite::Expansion,
        }
    }
}
