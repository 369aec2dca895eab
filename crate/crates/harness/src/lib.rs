//! Config-driven experiments over the attack and defenses in `lfd-core`,
//! with CSV / JSON reports and the `lfd` command-line tool.
//!
//! A run is described by a [`ScenarioConfig`]; [`run_experiment`] turns it
//! into an [`ExperimentReport`] with one row per method and feature mode.
//! All randomness comes from the config's master seed through the schedule
//! in [`seeds`].

pub mod cli;
pub mod config;
mod error;
pub mod pipeline;
pub mod report;
pub mod seeds;

pub use config::{DatasetSource, FeatureMode, FeatureModes, Method, ScenarioConfig};
pub use error::{Error, Result};
pub use pipeline::{run_experiment, run_scenario, ScenarioRun};
pub use report::{ExperimentReport, ReportFormat, ReportRow};
