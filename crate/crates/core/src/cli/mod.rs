//! Configuration, command dispatch and run artifacts behind the `singfrac`
//! binary.

pub mod artifacts;
pub mod commands;
pub mod config;

pub use artifacts::{Manifest, RunDir};
pub use commands::{run_command, Certificate, Command, Outcome};
pub use config::{load_config, RunConfig};
