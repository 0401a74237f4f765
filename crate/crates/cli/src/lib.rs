//! Library half of the `aid` command-line tool: dataset ingestion,
//! configuration and the subcommands, kept here so they can be tested.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod output;
