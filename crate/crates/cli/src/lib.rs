//! Scenario files and commands behind the `debond` binary.

pub mod commands;
pub mod config;

pub use commands::{CliError, CliResult};
pub use config::{ConfigError, FunctionSpec, ScenarioConfig};
