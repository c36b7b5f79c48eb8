//! Command implementations and the experiment harness behind the `ptlab` binary.

pub mod commands;
pub mod experiments;
pub mod report;

pub use experiments::{run_experiment, ExperimentConfig, EXPERIMENTS};
pub use report::{Assertion, Report};
