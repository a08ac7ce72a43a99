//! Closed-form communication lower bounds and the audits that compare them
//! with the resources of concrete attacks.
//!
//! Negative values are clamped to 0. Bounds known only up to an unspecified
//! constant are reported symbolically and never decide an inequality.

pub mod audit;
pub mod formulas;

pub use audit::{audit_corpus, audit_entry, default_corpus, AuditEntry, CorpusAudit, CorpusEntry};
pub use formulas::{
    audit_error, chain_audit, cleve_ip_bound, cleve_report, depth_report, depth_tradeoff, depth_tradeoff_log, disj_bound, disj_report, eps_grid, eps_prime,
    eps_prime_report, main_theorem_audit, nayak_ip_bound, nayak_report, sweep, BoundFunction, BoundParams, BoundReport, CostProfile, SweepRow, SymbolicBound,
};
