//! Command-line harness: case configuration, run manifests and the
//! subcommands behind the `wallrom` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;

pub use commands::Context;
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
