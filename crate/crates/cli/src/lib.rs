//! Config-driven front end for `curvband`: reads a TOML run file, executes one
//! scenario and writes CSV tables plus a plain-text run summary.

pub mod config;
pub mod error;
pub mod run;

pub use config::{parse_config, serialize_config, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{run_command, Command, Overrides};
