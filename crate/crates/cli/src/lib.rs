//! Configuration-driven runner for `qpar` experiments.
//!
//! A JSON [`RunConfig`](config::RunConfig) is validated into a
//! [`RunPlan`](config::RunPlan), executed by [`run`](run::run), and written
//! out as a CSV trace table, an optional SVG plot, and a
//! [`RunManifest`](manifest::RunManifest) that is enough to reproduce the CSV
//! byte for byte.

pub mod config;
pub mod csv;
pub mod error;
pub mod manifest;
pub mod presets;
pub mod run;
pub mod svg;

pub use config::{validate, RunConfig, RunPlan};
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
pub use run::{rerun, run, RunOptions, RunOutcome};
