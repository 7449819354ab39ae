//! Command-line front end for the `nbse` library: matrix ingestion, flat
//! key-value configuration, staged pipeline runs and report emission.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use pipeline::{run_pipeline, run_stages, RunOutputs, Stage};
pub use report::RunReport;
