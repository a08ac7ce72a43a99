//! Audits over the strategy corpus: every strategy the evaluator certifies
//! must satisfy the communication inequality at its certified `(ε, δ)`.

use serde::{Deserialize, Serialize};

use super::formulas::{main_theorem_audit, BoundFunction, BoundReport, CostProfile};
use crate::gardenhose::{build_ip_protocol, compile_strategy, Wiring};
use crate::reduction::smp_register_size;
use crate::tasks::evaluate::{default_threshold, evaluate_strategy, Certificate, CorrectnessReport, SimOptions};
use crate::tasks::library::{depolarized_routing, identity_routing, x_only_bb84, x_only_routing};
use crate::tasks::{BooleanFunction, Builtin, Strategy};
use crate::{Result, SCHEMA_VERSION};

impl CostProfile {
    /// SMP register size, worst-case first-round counts and the widest gate
    /// choice over all inputs.
    pub fn of_strategy(s: &Strategy, report: &CorrectnessReport) -> Result<Self> {
        let (c_g, c_m) = report.max_costs();
        let mut bpc = 0;
        for r in &report.rows {
            bpc = bpc.max(s.alice_circuit(&r.x)?.gateset.bits_per_choice()).max(s.bob_circuit(&r.y)?.gateset.bits_per_choice());
        }
        Ok(Self { q: smp_register_size(s), c_g, c_m, bits_per_choice: bpc })
    }
}

/// A strategy with the function it is meant to compute.
pub struct CorpusEntry {
    pub strategy: Strategy,
    pub function: BooleanFunction,
    pub sim: SimOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub strategy: String,
    pub function: String,
    pub n: usize,
    pub certificate: Option<Certificate>,
    pub profile: CostProfile,
    /// Absent when the strategy is not certified; the inequality only
    /// constrains certified strategies.
    pub report: Option<BoundReport>,
}

impl AuditEntry {
    /// Failing means certified and the inequality is violated.
    pub fn ok(&self) -> bool {
        self.report.as_ref().and_then(|r| r.satisfied) != Some(false)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusAudit {
    pub schema_version: u32,
    pub entries: Vec<AuditEntry>,
    pub counterexamples: usize,
}

fn bound_for(f: &BooleanFunction) -> Option<BoundFunction> {
    match f.builtin_kind() {
        Some(Builtin::Ip) => Some(BoundFunction::Ip),
        Some(Builtin::Disj) => Some(BoundFunction::Disj),
        _ => None,
    }
}

pub fn audit_entry(e: &CorpusEntry) -> Result<AuditEntry> {
    let s = &e.strategy;
    let eps0 = default_threshold(s.task());
    let rep = evaluate_strategy(s, &e.function, eps0, &e.sim)?;
    let profile = CostProfile::of_strategy(s, &rep)?;
    let cert = rep.certify();
    let report = cert.map(|c| match bound_for(&e.function) {
        Some(b) => main_theorem_audit(profile, e.function.n(), c.epsilon, c.delta, eps0, b),
        None => {
            // Functions without a stated lower bound: the right-hand side is 0.
            let mut r = main_theorem_audit(profile, e.function.n(), c.epsilon, c.delta, eps0, BoundFunction::Ip);
            r.rhs = Some(0.0);
            r.value = r.lhs.unwrap_or(0.0);
            r.satisfied = Some(true);
            r.note = Some(format!("no lower bound for {}", e.function.name()));
            r
        }
    });
    Ok(AuditEntry { strategy: s.name.clone(), function: e.function.name(), n: e.function.n(), certificate: cert, profile, report })
}

/// Enough for every first-round branch of the pruned n = 1 attack.
pub const GARDEN_HOSE_BRANCH_LIMIT: usize = 1 << 20;

/// Library strategies plus the compiled garden-hose attack for n = 1
/// (exhaustive) and n = 2 (sampled with `samples` runs per input).
pub fn default_corpus(samples: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    let exact = SimOptions::default();
    let ex = |strategy, function| CorpusEntry { strategy, function, sim: exact };
    let mut out = vec![
        ex(identity_routing(), BooleanFunction::builtin(Builtin::Const0, 1)?),
        ex(depolarized_routing(0.05)?, BooleanFunction::builtin(Builtin::Const0, 1)?),
    ];
    for n in 1..=2 {
        out.push(ex(x_only_routing(n)?, BooleanFunction::builtin(Builtin::XOnly, n)?));
        out.push(ex(x_only_bb84(n)?, BooleanFunction::builtin(Builtin::XOnly, n)?));
    }
    out.push(CorpusEntry {
        strategy: compile_strategy(&build_ip_protocol(1, Wiring::Pruned)?)?,
        function: BooleanFunction::ip(1)?,
        sim: SimOptions::exhaustive(GARDEN_HOSE_BRANCH_LIMIT),
    });
    out.push(CorpusEntry {
        strategy: compile_strategy(&build_ip_protocol(2, Wiring::Pruned)?)?,
        function: BooleanFunction::ip(2)?,
        sim: SimOptions::sampled(samples, seed),
    });
    Ok(out)
}

pub fn audit_corpus(entries: &[CorpusEntry]) -> Result<CorpusAudit> {
    let entries = entries.iter().map(audit_entry).collect::<Result<Vec<_>>>()?;
    let counterexamples = entries.iter().filter(|e| !e.ok()).count();
    Ok(CorpusAudit { schema_version: SCHEMA_VERSION, entries, counterexamples })
}
