//! Detection: detector assemblies, outcome branching, coincidence patterns,
//! classification tables and the teleportation-based QND gate.

mod classify;
mod detector;
mod qnd;

pub use classify::{classify, ClassificationTable, UNCLASSIFIED};
pub use detector::{
    measure, measure_modes, CoincidencePattern, DetectorAssembly, DetectorId, DetectorModel, OutcomeBranch,
};
pub use qnd::{
    interferometric_cross_check, qnd_teleport, Qnd, QndConfig, QndCrossCheck, QndModel, QndResult, QndVariant,
};

pub(crate) use detector::{merge_residuals, split_records, unmeasured_modes};
