//! Filesystem, dataset, and CLI layer over `shadowdecomp-core`.
//!
//! The core crate holds the pure algorithms; this crate adds PNG/JPEG I/O,
//! params and report JSON, ISTD-layout dataset drivers (scan, ground-truth
//! correction, augmentation, evaluation), and the `shadowdecomp` binary.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod evalrun;
pub mod io;

pub use error::{AppError, Result};
