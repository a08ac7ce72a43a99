//! Gate-level circuits with mid-circuit measurement and classical feedforward.

pub mod circuit;
pub mod gateset;
pub mod simulate;
pub mod transcript;

pub use circuit::{Circuit, CircuitSummary, Classical, Instruction, Predicate, Var, Visibility};
pub use gateset::{ceil_log2, Gate, GateSet, GateSetSpec};
pub use simulate::{enumerate_branches, sample_branch, sample_stages, visit_branches, Inputs, Outcome, Stage, DEFAULT_BRANCH_LIMIT};
pub use transcript::{count_costs, AppliedGate, Branch, MeasurementRecord, Transcript};
