//! Library surface of the batch driver: configuration and the command
//! implementations, kept IO-free for direct use by the test suites.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_constants, cmd_model_dump, cmd_oracle, cmd_run, cmd_sweep, prepare, ConstantsReport,
    OracleReport, Prepared, RunReport, SweepResult, SweepSummary,
};
pub use config::{fmt_g17, ModelSpec, RunConfig, Tolerances};
