//! Configuration-driven experiment runner for `qkff`.
//!
//! A JSON (or TOML) [`config::ExperimentConfig`] selects the model, method,
//! time grid and observables; [`runner::run`] produces [`record::RunRecord`]s
//! and [`sweep`] computes required-dimension tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod record;
pub mod runner;
pub mod sweep;

pub use config::{load_config, load_config_with, parse_config, parse_config_with, ExperimentConfig, Format, MethodKind};
pub use error::{CliError, Result};
