//! Qubit f-routing and f-BB84: Boolean functions, the two-round strategy
//! model, evaluators and honest provers.

pub mod evaluate;
pub mod function;
pub mod honest;
pub mod library;
pub mod strategy;

pub use evaluate::{
    default_threshold, evaluate_input, evaluate_strategy, run_fbb84, run_frouting, Certificate, CorrectnessReport, InputResult, SimMode, SimOptions,
    EPS0_BB84, EPS0_ROUTING,
};
pub use function::{all_inputs, bit_string, BooleanFunction, Builtin};
pub use honest::{honest_bb84, honest_bb84_in_basis, honest_report, honest_routing};
pub use strategy::{joint_key, Decoder, Keyed, Partition, Povm, ResourceFactor, Round2, Strategy, TaskKind, INPUT_QUBIT, REFERENCE};
