//! Branch-by-branch execution of circuits with mid-circuit measurement.

use std::collections::BTreeMap;

use rand::Rng;

use super::circuit::{Circuit, Classical, Instruction};
use super::transcript::{AppliedGate, Branch, MeasurementRecord, Transcript};
use crate::qcore::random::seeded_rng;
use crate::qcore::state::LabeledState;
use crate::{Error, Result};

pub const DEFAULT_BRANCH_LIMIT: usize = 1 << 12;

/// A circuit bound to register labels: local wire `i` is `wires[i]`.
#[derive(Clone, Copy, Debug)]
pub struct Stage<'a> {
    pub circuit: &'a Circuit,
    pub wires: &'a [String],
}

/// A branch together with its renormalized post-state.
#[derive(Clone, Debug)]
pub struct Outcome<S> {
    pub branch: Branch,
    pub state: S,
}

impl<S> Outcome<S> {
    pub fn root(state: S) -> Self {
        Self { branch: Branch { transcripts: Vec::new(), probability: 1.0, bits: BTreeMap::new() }, state }
    }
}

/// Classical inputs of the two parties.
#[derive(Clone, Copy, Debug)]
pub struct Inputs<'a> {
    pub x: &'a [bool],
    pub y: &'a [bool],
}

impl Inputs<'static> {
    pub const NONE: Inputs<'static> = Inputs { x: &[], y: &[] };
}

enum Choice<'r, R> {
    All { limit: usize, leaves: usize },
    Sample(&'r mut R),
}

struct Walker<'a, 'r, R, F> {
    stages: &'a [Stage<'a>],
    inputs: Inputs<'a>,
    offset: usize,
    choice: Choice<'r, R>,
    /// Record of the path being explored; children undo their additions.
    branch: Branch,
    visit: F,
}

impl<'a, R: Rng, F> Walker<'a, '_, R, F> {
    fn run<S: LabeledState>(&mut self, mut stack: Vec<(usize, &'a [Instruction])>, mut state: S) -> Result<()>
    where
        F: FnMut(&Branch, S) -> Result<()>,
    {
        loop {
            let Some((si, slice)) = stack.last_mut() else {
                if let Choice::All { limit, leaves } = &mut self.choice {
                    *leaves += 1;
                    if *leaves > *limit {
                        return Err(Error::BranchLimit { limit: *limit });
                    }
                }
                return (self.visit)(&self.branch, state);
            };
            let Some((ins, rest)) = slice.split_first() else {
                stack.pop();
                continue;
            };
            *slice = rest;
            let si = *si;
            let stage = self.stages[si];
            let col = self.offset + si;
            let label = |t: usize| -> Result<&String> {
                stage.wires.get(t).ok_or_else(|| Error::MalformedCircuit(format!("no wire bound to local qubit {t}")))
            };
            match ins {
                Instruction::Gate { gate, targets } => {
                    let g = stage.circuit.gateset.gate(*gate)?;
                    if g.arity != targets.len() {
                        return Err(Error::MalformedCircuit(format!("gate `{}` takes {} targets", g.name, g.arity)));
                    }
                    let labels: Vec<String> = targets.iter().map(|&t| label(t).cloned()).collect::<Result<_>>()?;
                    state.apply_unitary(&labels, &g.matrix)?;
                    self.branch.transcripts[col].applied_gates.push(AppliedGate { gate: *gate, targets: targets.clone() });
                }
                Instruction::Measure { target, bit } => {
                    let l = label(*target)?;
                    if self.branch.bits.contains_key(bit) {
                        return Err(Error::MalformedCircuit(format!("bit `{bit}` assigned twice")));
                    }
                    let record = |b: &mut Branch, p: f64, outcome: bool| {
                        b.probability *= p;
                        b.transcripts[col].measurements.push(MeasurementRecord { target: *target, outcome });
                        b.bits.insert(bit.clone(), outcome);
                    };
                    match &mut self.choice {
                        Choice::All { .. } => {
                            let saved_p = self.branch.probability;
                            let lens: Vec<(usize, usize)> =
                                self.branch.transcripts.iter().map(|t| (t.applied_gates.len(), t.measurements.len())).collect();
                            for outcome in [false, true] {
                                let (p, post) = state.project(l, outcome as usize)?;
                                let Some(post) = post else { continue };
                                record(&mut self.branch, p, outcome);
                                let r = self.run(stack.clone(), post);
                                self.branch.probability = saved_p;
                                for (t, &(g, m)) in self.branch.transcripts.iter_mut().zip(&lens) {
                                    t.applied_gates.truncate(g);
                                    t.measurements.truncate(m);
                                }
                                self.branch.bits.remove(bit);
                                r?;
                            }
                            return Ok(());
                        }
                        Choice::Sample(rng) => {
                            let (p0, post0) = state.project(l, 0)?;
                            let u: f64 = rng.random();
                            let (p, post, outcome) = match post0 {
                                Some(s) if u < p0 => (p0, s, false),
                                post0 => match state.project(l, 1)? {
                                    (p1, Some(s)) => (p1, s, true),
                                    _ => (p0, post0.ok_or_else(|| Error::InvalidState("both outcomes impossible".into()))?, false),
                                },
                            };
                            record(&mut self.branch, p, outcome);
                            state = post;
                        }
                    }
                }
                Instruction::Conditional { predicate, then_branch, else_branch } => {
                    let ctx = Classical { x: self.inputs.x, y: self.inputs.y, bits: &self.branch.bits };
                    let chosen = if predicate.eval(&ctx)? { then_branch } else { else_branch };
                    stack.push((si, chosen.as_slice()));
                }
            }
        }
    }
}

fn prepare<'a>(stages: &'a [Stage<'a>], init: &mut Branch) -> Result<(Vec<(usize, &'a [Instruction])>, usize)> {
    for s in stages {
        if s.wires.len() != s.circuit.qubits {
            return Err(Error::MalformedCircuit(format!(
                "circuit over {} qubits bound to {} wires",
                s.circuit.qubits,
                s.wires.len()
            )));
        }
    }
    let offset = init.transcripts.len();
    init.transcripts.extend(std::iter::repeat_with(Transcript::default).take(stages.len()));
    let stack = stages.iter().enumerate().rev().map(|(i, s)| (i, s.circuit.instructions.as_slice())).collect();
    Ok((stack, offset))
}

/// Runs `stages` in order from `init`, calling `visit` with the branch record
/// and post-state of every branch with non-zero probability (outcome 0
/// explored first). Returns the branch count.
pub fn visit_branches<S, F>(stages: &[Stage<'_>], init: Outcome<S>, inputs: Inputs<'_>, limit: usize, visit: F) -> Result<usize>
where
    S: LabeledState,
    F: FnMut(&Branch, S) -> Result<()>,
{
    let Outcome { mut branch, state } = init;
    let (stack, offset) = prepare(stages, &mut branch)?;
    let mut w: Walker<'_, '_, rand_chacha::ChaCha8Rng, F> =
        Walker { stages, inputs, offset, choice: Choice::All { limit, leaves: 0 }, branch, visit };
    w.run(stack, state)?;
    match w.choice {
        Choice::All { leaves, .. } => Ok(leaves),
        Choice::Sample(_) => unreachable!(),
    }
}

/// Samples one branch of `stages`, choosing each outcome with its Born probability.
pub fn sample_stages<S: LabeledState, R: Rng>(stages: &[Stage<'_>], init: Outcome<S>, inputs: Inputs<'_>, rng: &mut R) -> Result<Outcome<S>> {
    let Outcome { mut branch, state } = init;
    let (stack, offset) = prepare(stages, &mut branch)?;
    let mut out = None;
    let mut w = Walker {
        stages,
        inputs,
        offset,
        choice: Choice::Sample(rng),
        branch,
        visit: |b: &Branch, s: S| {
            out = Some(Outcome { branch: b.clone(), state: s });
            Ok(())
        },
    };
    w.run(stack, state)?;
    out.ok_or_else(|| Error::InvalidState("sampling produced no branch".into()))
}

/// All branches of a single circuit applied to `input`.
pub fn enumerate_branches<S: LabeledState>(
    circuit: &Circuit,
    wires: &[String],
    input: &S,
    inputs: Inputs<'_>,
    limit: usize,
) -> Result<Vec<Outcome<S>>> {
    let mut out = Vec::new();
    visit_branches(&[Stage { circuit, wires }], Outcome::root(input.clone()), inputs, limit, |b, s| {
        out.push(Outcome { branch: b.clone(), state: s });
        Ok(())
    })?;
    Ok(out)
}

pub fn sample_branch<S: LabeledState>(circuit: &Circuit, wires: &[String], input: &S, inputs: Inputs<'_>, seed: u64) -> Result<Outcome<S>> {
    sample_stages(&[Stage { circuit, wires }], Outcome::root(input.clone()), inputs, &mut seeded_rng(seed))
}
