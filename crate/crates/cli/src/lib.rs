//! Command-line front end for `blocksplit`: fullness sweeps written as CSV,
//! analysis tables, SVG plots and a verification suite.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod table;
pub mod verify;

pub use args::run;
pub use error::CliError;
