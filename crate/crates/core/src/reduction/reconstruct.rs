//! Referee-side reconstruction of the post-first-round state from the two
//! classical messages and the public description of the strategy.
//!
//! A message lists gates before measurements, so the referee replays each
//! measurement right after the last gate on its target. This reproduces the
//! executed order whenever no gate touches a qubit after it was measured,
//! which [`check_replayable`] enforces.

use std::collections::BTreeSet;

use super::encode::{decode, unshifted, EncodedMessage};
use crate::circuits::{GateSet, Instruction, Transcript};
use crate::qcore::{FactoredState, LabeledState};
use crate::tasks::Strategy;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Event {
    Gate(usize),
    Measure(usize),
}

/// Replay order of a transcript's gates and measurements.
pub fn schedule(t: &Transcript) -> Vec<Event> {
    let anchor: Vec<Option<usize>> = t
        .measurements
        .iter()
        .map(|m| t.applied_gates.iter().rposition(|g| g.targets.contains(&m.target)))
        .collect();
    let mut out: Vec<Event> = (0..t.measurements.len()).filter(|&k| anchor[k].is_none()).map(Event::Measure).collect();
    for i in 0..t.applied_gates.len() {
        out.push(Event::Gate(i));
        out.extend((0..t.measurements.len()).filter(|&k| anchor[k] == Some(i)).map(Event::Measure));
    }
    out
}

fn walk(ins: &[Instruction], measured: &mut BTreeSet<usize>) -> Result<()> {
    for i in ins {
        match i {
            Instruction::Gate { targets, .. } => {
                if let Some(t) = targets.iter().find(|t| measured.contains(t)) {
                    return Err(Error::InvalidStrategy(format!("first-round gate acts on wire {t} after it was measured")));
                }
            }
            Instruction::Measure { target, .. } => {
                measured.insert(*target);
            }
            Instruction::Conditional { then_branch, else_branch, .. } => {
                let mut a = measured.clone();
                let mut b = measured.clone();
                walk(then_branch, &mut a)?;
                walk(else_branch, &mut b)?;
                measured.extend(a);
                measured.extend(b);
            }
        }
    }
    Ok(())
}

/// Rejects strategies whose first-round circuits may act on a measured wire,
/// the one pattern a gates-then-measurements message cannot order.
pub fn check_replayable(s: &Strategy) -> Result<()> {
    for c in s.alice_round1.values().chain(s.bob_round1.values()) {
        walk(&c.instructions, &mut BTreeSet::new())?;
    }
    Ok(())
}

/// Size of the register the messages address: Alice's wires, then Bob's.
/// At least 2 so every location field has a bit.
pub fn smp_register_size(s: &Strategy) -> usize {
    (s.alice_wires.len() + s.bob_wires.len()).max(2)
}

/// Applies a party's transcript (local targets into `wires`) to `state`.
/// Returns the probability of the recorded outcomes; `first` numbers the
/// measurements for error reporting.
pub fn replay(state: &mut FactoredState, t: &Transcript, wires: &[String], gs: &GateSet, first: usize) -> Result<f64> {
    let label = |k: usize| wires.get(k).cloned().ok_or_else(|| Error::Decode(format!("location {k} outside the party's {} wires", wires.len())));
    let mut p = 1.0;
    for e in schedule(t) {
        match e {
            Event::Gate(i) => {
                let g = &t.applied_gates[i];
                let gate = gs.gate(g.gate)?;
                let labels = g.targets.iter().map(|&k| label(k)).collect::<Result<Vec<_>>>()?;
                state.apply_unitary(&labels, &gate.matrix)?;
            }
            Event::Measure(k) => {
                let m = t.measurements[k];
                let (pk, post) = state.project(&label(m.target)?, m.outcome as usize)?;
                *state = post.ok_or(Error::InconsistentOutcome(first + k))?;
                p *= pk;
            }
        }
    }
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    /// Normalized `ρ_{RMM'}(m)`, stored as a product of pure factors.
    pub state: FactoredState,
    /// Probability of the outcome string `m`.
    pub probability: f64,
    /// Decoded transcripts in each party's local wire indices.
    pub alice: Transcript,
    pub bob: Transcript,
}

/// Decodes both messages, replays them on the strategy's initial resource and
/// returns the branch state. Alice's locations are `0..|A|`, Bob's follow.
pub fn reconstruct_state(s: &Strategy, alice: &EncodedMessage, bob: &EncodedMessage, x: &[bool], y: &[bool]) -> Result<Reconstruction> {
    let q = smp_register_size(s);
    let na = s.alice_wires.len();
    let ca = s.alice_circuit(x)?;
    let cb = s.bob_circuit(y)?;
    let ta = decode(&alice.bits, q, &ca.gateset, alice.gate_count())?;
    let tb = unshifted(&decode(&bob.bits, q, &cb.gateset, bob.gate_count())?, na)?;
    let mut alice_targets = ta.applied_gates.iter().flat_map(|g| g.targets.iter().copied()).chain(ta.measurements.iter().map(|m| m.target));
    if alice_targets.any(|k| k >= na) {
        return Err(Error::Decode("Alice's message addresses Bob's wires".into()));
    }
    let mut state = s.initial_state()?;
    let pa = replay(&mut state, &ta, &s.alice_wires, &ca.gateset, 0)?;
    let pb = replay(&mut state, &tb, &s.bob_wires, &cb.gateset, ta.measurements.len())?;
    Ok(Reconstruction { state, probability: pa * pb, alice: ta, bob: tb })
}
