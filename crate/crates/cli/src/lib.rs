//! Command-line driver for the piston-pipe simulator: configuration,
//! run orchestration, contact-time estimates and the acceptance checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod estimate;
pub mod run;

pub use checks::{all_criteria, CheckOutcome, Suite};
pub use config::{load_config, parse_config, ConfigError, ScenarioConfig};
pub use run::{exit_code, run_command, RunError, RunSummary, Snapshot, SERIES_COLUMNS};
