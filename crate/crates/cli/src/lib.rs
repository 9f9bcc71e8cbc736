//! Configuration-driven front end for the `geoscat` library: mode-table
//! caching, transmission and current sweeps written as CSV, and the presets
//! that regenerate the reference figure data.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod config;
pub mod reproduce;
pub mod store;
pub mod sweep;

pub use app::{run, Cli, Command};
pub use config::RunConfig;
