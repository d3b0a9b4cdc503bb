//! Experiment harness: configuration, run-matrix execution, artifact
//! persistence, dataset ingestion, and SVG plotting on top of
//! `permutopt-core`.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod execute;
pub mod svg;

pub use config::{load_config, AnalysisToggles, ExperimentConfig, OptimizerSpec, ProblemEntry};
pub use error::HarnessError;
