//! Numerical laboratory for hyperbolic first-order systems: certificates of
//! strong hyperbolicity, symmetrizers and their regularity, Gaussian wave
//! packets, and Cauchy evolutions of model systems.

pub mod cauchy;
pub mod error;
pub mod matrix;
pub mod regularity;
pub mod sampling;
pub mod serial;
pub mod symbol;
pub mod wavepacket;

pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};
