//! Command-line front end and HTTP service for the depthstroke engine.

pub mod args;
pub mod commands;
pub mod error;
pub mod service;
pub mod wire;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
