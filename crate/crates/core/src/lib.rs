//! Single-qubit photonic data re-uploading classifiers.
//!
//! Circuits are chains of Mach-Zehnder interferometers acting on one photon in
//! two modes. The crate simulates them, trains them with a discriminant-style
//! loss and analyses the function classes they realise.

pub mod analysis;
pub mod classify;
pub mod cli;
pub mod data;
pub mod error;
pub mod exec;
pub mod model;
pub mod noise;
pub mod qcore;
pub mod train;

pub use error::{Error, Result};
pub use exec::Exec;
