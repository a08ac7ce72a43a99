//! Bit-exact encoding of a first-round transcript into a classical message.
//!
//! Layout, every field big-endian:
//!
//! ```text
//! gate item        = choice (bits_per_choice) | loc₁ (L) | loc₂ (L)
//! measurement item = loc (L) | outcome (1)
//! message          = gate items in order, then measurement items in order
//! ```
//!
//! with `L = ⌈log₂ q⌉`. Single-qubit gates carry an all-zero `loc₂`. The
//! boundary between the two sections is `C_G · (bits_per_choice + 2L)`; the
//! referee learns `C_G` alongside the message.

use serde::{Deserialize, Serialize};

use crate::circuits::{ceil_log2, AppliedGate, GateSet, MeasurementRecord, Transcript};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    GateChoice,
    GateLocation,
    MeasurementLocation,
    Outcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub kind: SpanKind,
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedMessage {
    #[serde(with = "crate::tasks::evaluate::bitstr")]
    pub bits: Vec<bool>,
    pub layout: Vec<Span>,
}

impl EncodedMessage {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit_string(&self) -> String {
        crate::tasks::bit_string(&self.bits)
    }

    /// Number of gate items, read off the layout.
    pub fn gate_count(&self) -> usize {
        self.layout.iter().filter(|s| s.kind == SpanKind::GateChoice).count()
    }
}

/// Field widths for a register of `q` qubits and a gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Widths {
    pub choice: usize,
    pub location: usize,
}

impl Widths {
    pub fn new(q: usize, gs: &GateSet) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidArgument(format!("encoding needs q ≥ 2, got {q}")));
        }
        if gs.max_arity() > 2 {
            return Err(Error::InvalidArgument("gate items carry at most two locations".into()));
        }
        Ok(Self { choice: gs.bits_per_choice(), location: ceil_log2(q) })
    }

    pub fn gate_item(&self) -> usize {
        self.choice + 2 * self.location
    }

    pub fn measurement_item(&self) -> usize {
        self.location + 1
    }

    /// Message length for `c_g` gates and `c_m` measurements.
    pub fn message_len(&self, c_g: usize, c_m: usize) -> usize {
        self.gate_item() * c_g + self.measurement_item() * c_m
    }
}

/// `(2⌈log₂ q⌉ + bits_per_choice)·C_G + (⌈log₂ q⌉ + 1)·C_M`.
pub fn encoded_length(q: usize, gs: &GateSet, c_g: usize, c_m: usize) -> Result<usize> {
    Ok(Widths::new(q, gs)?.message_len(c_g, c_m))
}

struct Writer {
    bits: Vec<bool>,
    layout: Vec<Span>,
}

impl Writer {
    fn field(&mut self, kind: SpanKind, value: usize, len: usize) {
        let start = self.bits.len();
        self.bits.extend((0..len).rev().map(|i| (value >> i) & 1 == 1));
        self.layout.push(Span { kind, start, len });
    }
}

/// Encodes `t` with target indices taken as positions in a `q`-qubit register.
pub fn encode_transcript(t: &Transcript, q: usize, gs: &GateSet) -> Result<EncodedMessage> {
    let w = Widths::new(q, gs)?;
    let check = |target: usize| -> Result<()> {
        if target >= q {
            return Err(Error::InvalidArgument(format!("target {target} outside a {q}-qubit register")));
        }
        Ok(())
    };
    let mut out = Writer { bits: Vec::with_capacity(w.message_len(t.applied_gates.len(), t.measurements.len())), layout: Vec::new() };
    for g in &t.applied_gates {
        let gate = gs.gate(g.gate)?;
        if gate.arity != g.targets.len() {
            return Err(Error::InvalidArgument(format!("gate `{}` applied to {} targets", gate.name, g.targets.len())));
        }
        out.field(SpanKind::GateChoice, g.gate, w.choice);
        for k in 0..2 {
            let loc = match g.targets.get(k) {
                Some(&tg) => {
                    check(tg)?;
                    tg
                }
                None => 0,
            };
            out.field(SpanKind::GateLocation, loc, w.location);
        }
    }
    for m in &t.measurements {
        check(m.target)?;
        out.field(SpanKind::MeasurementLocation, m.target, w.location);
        out.field(SpanKind::Outcome, m.outcome as usize, 1);
    }
    Ok(EncodedMessage { bits: out.bits, layout: out.layout })
}

fn read(bits: &[bool], pos: &mut usize, len: usize) -> usize {
    let v = bits[*pos..*pos + len].iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
    *pos += len;
    v
}

/// Inverse of [`encode_transcript`] given the number of gate items.
pub fn decode(bits: &[bool], q: usize, gs: &GateSet, c_g: usize) -> Result<Transcript> {
    let w = Widths::new(q, gs)?;
    let gate_section = w.gate_item() * c_g;
    if bits.len() < gate_section || (bits.len() - gate_section) % w.measurement_item() != 0 {
        return Err(Error::Decode(format!("{} bits do not split into {c_g} gate items and whole measurement items", bits.len())));
    }
    let c_m = (bits.len() - gate_section) / w.measurement_item();
    let mut pos = 0;
    let mut t = Transcript::default();
    for i in 0..c_g {
        let choice = read(bits, &mut pos, w.choice);
        let gate = gs.gate(choice).map_err(|_| Error::Decode(format!("gate item {i}: choice {choice} outside the gate set")))?;
        let locs = [read(bits, &mut pos, w.location), read(bits, &mut pos, w.location)];
        for &l in &locs[..gate.arity] {
            if l >= q {
                return Err(Error::Decode(format!("gate item {i}: location {l} outside {q} qubits")));
            }
        }
        match gate.arity {
            1 if locs[1] != 0 => return Err(Error::Decode(format!("gate item {i}: nonzero padding"))),
            2 if locs[0] == locs[1] => return Err(Error::Decode(format!("gate item {i}: repeated target {}", locs[0]))),
            _ => {}
        }
        t.applied_gates.push(AppliedGate { gate: choice, targets: locs[..gate.arity].to_vec() });
    }
    for i in 0..c_m {
        let target = read(bits, &mut pos, w.location);
        if target >= q {
            return Err(Error::Decode(format!("measurement item {i}: location {target} outside {q} qubits")));
        }
        let outcome = read(bits, &mut pos, 1) == 1;
        t.measurements.push(MeasurementRecord { target, outcome });
    }
    Ok(t)
}

/// `t` with every target shifted by `offset`, placing a party's local wires
/// inside the global register.
pub fn shifted(t: &Transcript, offset: usize) -> Transcript {
    Transcript {
        applied_gates: t
            .applied_gates
            .iter()
            .map(|g| AppliedGate { gate: g.gate, targets: g.targets.iter().map(|x| x + offset).collect() })
            .collect(),
        measurements: t.measurements.iter().map(|m| MeasurementRecord { target: m.target + offset, outcome: m.outcome }).collect(),
    }
}

/// Inverse of [`shifted`]; errors if a target lies below `offset`.
pub fn unshifted(t: &Transcript, offset: usize) -> Result<Transcript> {
    let back = |x: usize| x.checked_sub(offset).ok_or_else(|| Error::Decode(format!("location {x} belongs to the other party")));
    Ok(Transcript {
        applied_gates: t
            .applied_gates
            .iter()
            .map(|g| Ok(AppliedGate { gate: g.gate, targets: g.targets.iter().map(|&x| back(x)).collect::<Result<_>>()? }))
            .collect::<Result<_>>()?,
        measurements: t.measurements.iter().map(|m| Ok(MeasurementRecord { target: back(m.target)?, outcome: m.outcome })).collect::<Result<_>>()?,
    })
}
