//! Command-line front end: config files, presets and the `spectrum`,
//! `sweep` and `validate` subcommands.

pub mod config;
pub mod error;
pub mod run;
pub mod validate;

pub use config::{preset, RunConfig, PRESETS};
pub use error::CliError;
pub use run::{run_spectrum, run_sweep, write_output};
pub use validate::{run_validate, Report};
