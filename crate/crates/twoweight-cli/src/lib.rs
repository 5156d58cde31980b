//! Orchestration of the certification battery: builds the measures, runs
//! every check at the configured truncation depths, and emits deterministic
//! JSON/CSV reports.

mod checks;
mod config;
mod output;

pub use checks::{run_battery, run_named_check, BatteryOutcome, MeasureCache};
pub use config::{ConfigError, OutputFormat, RunConfig, BATTERY_ORDER};
pub use output::{
    emit_profile, kernel_profile_csv, transform_eval_csv, write_measures, write_reports,
    write_reversal_witness,
};
