//! Experiment drivers behind the `frameavg` binary: identity verification,
//! convergence sweeps, the spatial saturation scan and the locality probe.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod probe;
pub mod record;
pub mod sweep;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use record::{emit_csv, read_records, write_records, ExperimentRecord};
