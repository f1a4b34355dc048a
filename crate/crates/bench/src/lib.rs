//! Experiment harness for `grnewton`: JSON configs, method presets,
//! parallel runs and CSV/JSON artifacts.

pub mod artifact;
pub mod config;
pub mod experiment;
pub mod methods;

pub use config::{ExperimentConfig, Preset};
pub use experiment::{run_experiment, BenchError, RunOutput};
