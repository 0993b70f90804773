//! Configuration, orchestration and reporting for the `repair` command.

pub mod config;
pub mod inspect;
pub mod report;
pub mod run;

pub use config::{load_config, load_config_with, ConfigError, FlMode, Overrides, RepairConfig};
pub use report::{emit_report, RunReport, RunStatus};
pub use run::{orchestrate_repair, RepairError, RunOutcome, EXIT_ERROR, EXIT_NO_PATCH, EXIT_PATCHED};
