//! Batch front end for `feq-core`: JSON run configs, deterministic reports and
//! CSV tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod report;
pub mod tables;

pub use commands::{CliError, Outcome, RunArgs};
pub use config::{example_config, LoadedConfig, RunConfig};
