//! Configuration and subcommands of the `hom-superres` command-line tool.

pub mod commands;
pub mod config;

pub use commands::{cmd_density_map, cmd_fisher_scan, cmd_reproduce_fig2, cmd_simulate, RunOptions, RunSummary};
pub use config::{Scenario, ScenarioConfig};
