//! State factories, analyzer circuits, runners, probability accounting and
//! the loss model.

pub mod analyzers;
pub mod circuit;
pub mod loss;
pub mod report;
pub mod resources;
pub mod states;

pub use analyzers::{run_pbsa, run_pgsa, GhzAnalyzer, LabeledBranch, PolarizationBellAnalyzer};
pub use circuit::{
    canonical_circuit, cghz_circuit, execute, logic_bsa_circuit, post_selected_state, run_elements, Circuit,
    DetectorSpec, Element, Execution, LedgerEntry, Protocol,
};
pub use loss::{
    ideal_success_probability, monte_carlo_success, success_probability_formula, sweep, Counting, Estimate,
    MonteCarloEstimate, MonteCarloParams, SweepRow,
};
pub use report::{run_cghz_analysis, run_logic_bsa, run_protocol, Classifier, ProtocolReport, RunStatus};
pub use resources::{resource_count, ResourceCount};
pub use states::{
    make_bell, make_cghz, make_ghz, make_labeled, make_logic_bell, BellLabel, LogicBell, LogicStateLabel, Sign,
};
