//! Exact linear-optics simulation of logic Bell-state analysis and
//! concatenated-GHZ (C-GHZ) state analysis.
//!
//! The crate is layered bottom-up:
//!
//! - [`fock`]: sparse bosonic state engine (tensor products, creation-operator
//!   substitution, inner products, post-selection).
//! - [`elements`]: half-wave plates, polarizing and 50:50 beam splitters,
//!   polarizers.
//! - [`measure`]: detector assemblies, outcome branching, coincidence
//!   patterns, classification tables and the teleportation-based QND gate.
//! - [`protocols`]: state factories, the analyzer circuits and their runners,
//!   success-probability accounting and the loss model.

pub mod elements;
pub mod error;
pub mod fock;
pub mod measure;
pub mod protocols;

pub use error::{Error, Result};

/// Amplitudes with magnitude at or below this are dropped from states.
pub const PRUNE_EPSILON: f64 = 1e-12;

/// Comparison tolerance for norms, isometry checks and fidelities.
pub const TOLERANCE: f64 = 1e-10;

/// Default upper bound on the total photon number of a state.
pub const DEFAULT_PHOTON_CAP: u32 = 16;
