//! Dense linear-algebra substrate: labeled registers, pure and mixed states,
//! channels, distance measures and entropies.

pub mod channel;
pub mod entropy;
pub mod factored;
pub mod layout;
pub mod linalg;
pub mod measures;
pub mod random;
pub mod state;

pub use channel::ChannelRep;
pub use entropy::{
    binary_entropy, cit_gap, conditional_entropy, continuity_gap, dephase, measure_in_basis, von_neumann_entropy,
    Basis, MeasurementOutcome,
};
pub use factored::FactoredState;
pub use layout::RegisterLayout;
pub use linalg::{CMatrix, CVector};
pub use measures::{fidelity, helstrom_guess_prob, purified_distance, trace_distance};
pub use state::{DensityOperator, LabeledState, PureState};
