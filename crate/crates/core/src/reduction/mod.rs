//! Reduction from two-round attacks to simultaneous-message protocols:
//! transcript encoding, referee-side reconstruction, and classification of
//! the reconstructed state.

pub mod battery;
pub mod encode;
pub mod hmin;
pub mod reconstruct;
pub mod referee;
pub mod smp;

pub use battery::{run_all as run_batteries, BatteryCounts, BatteryResult};
pub use encode::{decode, encode_transcript, encoded_length, EncodedMessage, Span, SpanKind, Widths};
pub use hmin::{compressed_marginal, hmin, hmin_pure, seesaw_recovery, MinEntropyResult};
pub use reconstruct::{check_replayable, reconstruct_state, smp_register_size, Reconstruction};
pub use referee::{classify_bb84, classify_factored, classify_routing, RefereeVerdict, Verdict, VerdictCache};
pub use smp::{smp_simulation, BranchRecord, SmpOptions, SmpReport, SmpRow};
