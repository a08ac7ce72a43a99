//! Simulation and verification laboratory for the quantum position-verification
//! tasks f-routing and f-BB84.
//!
//! The crate is split by concern:
//!
//! - [`qcore`]: labeled dense states, channels, distances and entropies.
//! - [`circuits`]: gate-level circuits with mid-circuit measurement and feedforward.
//! - [`tasks`]: Boolean functions, two-party strategies, honest provers and evaluators.
//! - [`gardenhose`]: the garden-hose model and the inner-product attack.
//! - [`reduction`]: transcript encoding, referee reconstruction and classification.
//! - [`bounds`]: closed-form lower bounds and consistency audits.

pub mod bounds;
pub mod circuits;
pub mod error;
pub mod gardenhose;
pub mod qcore;
pub mod reduction;
pub mod tasks;

pub use error::{Error, Result};

/// Version tag written into every JSON/CSV artifact.
pub const SCHEMA_VERSION: u32 = 1;
