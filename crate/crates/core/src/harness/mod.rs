//! Test-signal generators, experiment configuration and batch execution.

mod config;
mod experiment;
mod generate;

pub use config::{ExperimentConfig, GridConfig, MatrixSource, SolverKind};
pub use experiment::{add_noise, covering_shifts, median, run_experiment, run_single, ExperimentOutcome, ResultRow};
pub use generate::{generate_signal, generate_window, SignalKind, SignalSpec};
