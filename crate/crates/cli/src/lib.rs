//! Config-driven experiment runner for nonlocal p-Laplace experiments.

pub mod config;
pub mod expr;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::{ExperimentConfig, Task, TaskKind};
pub use report::{emit_report, Record};
pub use runner::{exit_status, run_config, run_config_text, CliError, RunOptions, RunOutcome};
