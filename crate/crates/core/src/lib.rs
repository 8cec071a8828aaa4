//! Optimal concentric sampling (OCS) of the unit disk for Zernike fitting.
//!
//! The crate builds node patterns on the disk, assembles Zernike collocation
//! matrices (function values and slopes), measures their conditioning and
//! Lebesgue constants, optimizes ring radii, and runs the experiment suite
//! that compares OCS with baseline layouts.

pub mod asymptotics;
pub mod collocation;
pub mod error;
pub mod experiments;
pub mod lebesgue;
pub mod optimizer;
pub mod output;
pub mod patterns;
pub mod quadrature;
pub mod zernike;

pub use error::{OcsError, Result};
