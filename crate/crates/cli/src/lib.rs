//! Configuration, data loading and report generation for the `lptime` tool.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;

pub use config::{ConfigArgs, Format, PipelineConfig};
pub use error::{CliError, CliResult};
pub use io::load_series;
pub use pipeline::{run_pipeline, Context, Manifest, Stage};
