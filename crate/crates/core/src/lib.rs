//! Parity-conserving quantization of the baker's map on the torus at
//! Planck's constant `h = 1/N`.

pub mod classical;
pub mod error;
pub mod fast;
pub mod io;
pub mod matrix;
pub mod propagator;
pub mod sector;
pub mod semiclassics;
pub mod torus;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
