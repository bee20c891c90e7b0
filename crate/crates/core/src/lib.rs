//! Pseudospectral laboratory for the 2D inviscid Boussinesq system with stable
//! stratification, written in vorticity/density form on a periodic box.

pub mod data;
pub mod dispersive;
pub mod error;
pub mod estimates;
mod fft;
pub mod field;
pub mod grid;
pub mod harness;
pub mod littlewood_paley;
mod par;
pub mod picard;
pub mod rng;
pub mod snapshot;
pub mod solver;

pub use error::{Error, Result};
pub use field::{biot_savart, Axis, SpectralField, VectorField};
pub use grid::GridSpec;
