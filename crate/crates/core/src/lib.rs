//! Digital twin of a quantum-dot time-bin entanglement experiment.
//!
//! The pipeline runs from a phenomenological pair-source model
//! ([`source`]) through Franson-type analyzing interferometers modelled as
//! POVMs ([`analyzer`]), Monte Carlo detector time tags ([`simulator`]),
//! single-pass coincidence reduction ([`engine`]) to density-matrix
//! reconstruction with entanglement metrics ([`tomography`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel job scheduling live in the `timebin` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analyzer;
pub mod engine;
pub mod error;
pub mod linalg;
pub mod simulator;
pub mod source;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64;
