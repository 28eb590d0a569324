//! Experiment configs, runners and tabular output.

mod config;
mod record;
mod run;

pub use config::{ExperimentConfig, ExperimentKind, ModelRef, OutputFormat, Schedule};
pub use record::{emit, header, signed_gap, write_records, RunRecord, Value};
pub use run::{
    checked_beta, divergence_n, run, run_aep, run_mixing_audit, run_sanov, run_stationary, run_stein, Experiment,
    AEP_COLUMNS, CONVERSE_SLACK, MIXING_COLUMNS, SANOV_COLUMNS, STATIONARY_COLUMNS, STEIN_COLUMNS,
};
