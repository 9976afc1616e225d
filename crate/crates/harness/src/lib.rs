//! Experiment orchestration and reporting on top of `rcm-core`.

pub mod config;
pub mod error;
pub mod experiments;
pub mod report;

pub use config::{parse_graph_spec, Experiment, ExperimentConfig, Mode};
pub use error::{Error, Result};
pub use experiments::{run_experiment, susceptibility};
pub use report::{emit_report, parse_report, write_report, Report, Row};
