//! Experiment runner for the orthogonality-constrained ADMM solvers:
//! TOML specs, trace and summary files, and a self-check.

pub mod check;
pub mod error;
pub mod run;
pub mod spec;

pub use error::CliError;
pub use run::{run_experiment, RunOptions, RunReport};
pub use spec::{ExperimentSpec, SolverPlan};
