//! Critical Ising transfer matrices, lattice fermions and fusion coefficients
//! in the strip and the slit-strip, with their continuum counterparts.

pub mod error;
pub mod geometry;
pub mod par;
pub mod statespace;
pub mod transfer;
pub mod clifford;
pub mod discrete_cx;
pub mod fusion;
pub mod continuum;
pub mod scaling;

pub use error::{Error, Result};
