//! Batch front-end machinery for the `regap` binary: config parsing, CSV and
//! SVG emission, and the theory / simulate / reproduce / project commands.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod plot;
