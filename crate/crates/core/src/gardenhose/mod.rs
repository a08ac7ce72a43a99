//! Garden-hose model: permutations on hose wires, water flow, the
//! inner-product construction and its compilation to a teleportation attack.

pub mod compile;
pub mod permutation;
pub mod protocol;

pub use compile::{compile_strategy, compile_to_attack, verify_teleportation, CompiledAttack, TeleportCheck};
pub use permutation::{perm_a, perm_b, perm_f, s_block, Permutation};
pub use protocol::{build_ip_protocol, check_ip_exhaustive, cost_report, evaluate_flow, prune, CostReport, FlowResult, FlowStep, GardenHoseProtocol, HoseEnd, Side, Wiring};
