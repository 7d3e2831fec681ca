//! Variational constants and heat-kernel bounds for radial Schrödinger
//! operators `-Δ - V` with critical inverse-square potentials.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod funcs;
pub mod grids;
pub mod heat;
pub mod mazya;
pub mod ode;
pub mod rayleigh;
pub mod sectors;
pub mod shooting;

pub use error::{Error, Result};
