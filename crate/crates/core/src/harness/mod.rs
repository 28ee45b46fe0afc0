//! Experiment orchestration: configs, campaigns, metrics, CSV output and the
//! command-line entry point.

mod campaign;
mod cli;
mod config;
mod metrics;
mod output;

pub use campaign::{replication_seeds, run_campaign, run_id, RunRecord, RunRow};
pub use cli::{cli_main, EXIT_CONFIG, EXIT_NUMERICAL};
pub use config::{
    CoverageSettings, ExperimentConfig, GpSettings, LineSettings, MethodSpec, SEED_ENV_VAR,
};
pub use metrics::{coverage, information_gain, regret_probe, Coverage, CoverageReference};
pub use output::{
    aggregate, find, method_of, read_runs, records_as_runs, write_run, write_summary, CsvRow, SummaryRow,
    SCHEMA_VERSION,
};
