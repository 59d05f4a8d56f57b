//! Experiment harness: period measurement, causal-evolution checks,
//! configuration and the scenario runner behind the CLI.

pub mod config;
pub mod monotone;
pub mod period;
pub mod run;

pub use config::{ConfigError, ExperimentConfig, Scenario};
pub use monotone::{check_causal_evolution, default_family, MonotoneViolation, MonotonicityReport};
pub use period::{measure_period, oscillation_amplitude, spectral_period, PeriodEstimate};
pub use run::{run_experiment, HarnessError, Summary, EXIT_FAIL, EXIT_PASS, EXIT_USAGE};
