//! Batch experiments over simulated flights: TOML configuration, CSV
//! trajectory files and the staged experiment pipeline behind the
//! `plumenav` binary.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;

pub use config::{AnalysisOptions, Condition, ExperimentConfig, TurbulenceLevels};
pub use error::{CliError, Result};
pub use experiment::{analyze, fit, report, run_experiment, segment_all, simulate, ConditionSummary, Layout, Manifest};
