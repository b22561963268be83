//! Command-line front end of `beta-lab-core`: configuration, subcommands,
//! CSV tables, SVG plots and JSON reports.

pub mod commands;
pub mod config;
pub mod output;
