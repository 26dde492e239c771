//! Sparse Fock-space engine over polarization modes.
//!
//! States are sparse maps from occupation vectors to amplitudes over an
//! explicit registry of [`ModeId`]s. Optical elements act through
//! [`ModeLinearMap`], a substitution rule on creation operators, so bunching
//! and two-photon interference come out of the bosonic algebra directly.

mod json;
mod map;
mod mode;
mod state;

pub use map::ModeLinearMap;
pub use mode::{registry, ModeId, Polarization};
pub use state::{Basis, FockBasisVector, PhotonicState};

#[cfg(test)]
mod proptests;
