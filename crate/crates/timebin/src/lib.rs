//! Time-tag file format, configuration, pipeline and reports for the
//! time-bin entanglement simulator in [`timebin_core`].

pub mod config;
pub mod error;
pub mod formats;
pub mod oracle;
pub mod pipeline;
pub mod tagfile;

pub use config::{ExperimentConfig, PhaseSetting};
pub use error::{Error, Result};
pub use timebin_core as core;
