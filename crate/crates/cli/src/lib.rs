//! Library side of the `qwork` command-line tool.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

pub use commands::{cmd_mf, cmd_oscillator, cmd_ttm, cmd_verify, CommandError, Outcome, Status};
pub use config::{ConfigError, Overrides, Preset, RunConfig};
