//! IO, configuration and command implementations for the `sgdsamp`
//! binary: LIBSVM ingestion, synthetic dataset generation, experiment
//! configs, CSV/SVG emission, and the verification battery.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod dataset;
pub mod svg;

pub use config::ExperimentConfig;
pub use dataset::{gen_synthetic, parse_libsvm, write_libsvm, Dataset, SyntheticTask};
