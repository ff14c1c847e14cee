//! Configuration and dispatch for the `cburgers` command.

pub mod config;
pub mod run;

pub use config::{parse_config, parse_value, Check, Command, ConfigError, Format, Overrides, RunConfig, TGrid};
pub use run::{run, write_atomic, Outcome, RunError, TOOL_VERSION};
