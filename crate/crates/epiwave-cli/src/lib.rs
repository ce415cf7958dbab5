//! Command-line front end for the SQIR-V distributed-delay toolkit:
//! config ingestion, parameter presets, scenario runners and CSV output.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_config_with_base, preset, serialize_config, RunConfig};
pub use run::{run, Report, RunError};
