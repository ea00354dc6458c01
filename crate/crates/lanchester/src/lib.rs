//! Configuration files, file formats and the `lanchester` command line on
//! top of [`lanchester_core`].
//!
//! Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
//! failure, 4 I/O error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod summary;

pub use lanchester_core as core;

pub use commands::execute;
pub use config::{load_config, validate_config, Config, ConfigIssue, Format};
pub use error::CliError;
pub use formats::{DataFormat, Table, TopologyFile};
pub use summary::{Command, RunManifest, RunSummary};
