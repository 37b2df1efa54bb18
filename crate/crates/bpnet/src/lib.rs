//! File formats, reports and the command line for the bpnet toolkit.
//!
//! Numerics live in [`bpnet_core`]; this crate reads and writes record CSVs,
//! checkpoints and run configs, renders evaluation reports and plots, and
//! implements the `bpnet` subcommands.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod records;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
