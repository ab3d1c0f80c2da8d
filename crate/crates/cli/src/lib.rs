//! Batch driver for the URLLC models: config parsing, the four named
//! experiments and the use-case requirement presets.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;

pub use config::{parse_config, Experiment, ExperimentConfig, Value};
pub use error::{Error, Result};
pub use experiment::{run_experiment, validate, RunSummary};
pub use presets::{find_preset, list_presets, RequirementPreset};
