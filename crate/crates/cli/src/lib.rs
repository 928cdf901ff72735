//! Experiment harness around `wleak-core`.
//!
//! The library half owns configuration, artifact formats (weight files,
//! corpus/report files) and the staged pipeline; the `wleak` binary is a thin
//! subcommand dispatcher over it.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod weightfile;

mod error;

pub use error::{Error, Result};
