//! Configuration, experiment runners and report writing for the
//! `blaschke` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;

pub use config::{ConfigError, ExperimentConfig};
pub use run::{run, Operation, RunOutcome};
