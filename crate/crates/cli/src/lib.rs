//! Batch front end: problem files in, JSON reports out.

pub mod commands;
pub mod error;
pub mod format;
pub mod problem;
pub mod report;

pub use commands::{run, Command, Flags, Suite};
pub use error::CliError;
pub use problem::{load_problem, save_problem, ProblemFile};
pub use report::Report;
