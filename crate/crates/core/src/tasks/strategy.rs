//! The two-round strategy model shared by f-routing and f-BB84 attacks.
//!
//! Round 1: Alice acts on `Q` and her share of the resource, Bob on his. The
//! partition then splits every first-round wire into `M₀, M₀'` (Alice's) and
//! `M₁, M₁'` (Bob's); `M = M₀M₁` ends with Alice, `M' = M₀'M₁'` with Bob. In
//! round 2 both sides know `(x, y)` and act on what they hold.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::function::bit_string;
use crate::circuits::{Circuit, CircuitSummary, Visibility};
#[cfg(test)]
use crate::circuits::Instruction;
use crate::qcore::layout::RegisterLayout;
use crate::qcore::linalg::{c, CVector};
use crate::qcore::{FactoredState, PureState};
use crate::{Error, Result, SCHEMA_VERSION};

/// Reference system held by the referee, maximally entangled with `Q`.
pub const REFERENCE: &str = "R";
pub const INPUT_QUBIT: &str = "Q";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Routing,
    Bb84,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Routing => "routing",
            TaskKind::Bb84 => "bb84",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "routing" => Ok(TaskKind::Routing),
            "bb84" => Ok(TaskKind::Bb84),
            other => Err(Error::InvalidArgument(format!("unknown task `{other}`"))),
        }
    }
}

/// One tensor factor of the shared resource, big-endian over `labels`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceFactor {
    pub labels: Vec<String>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl ResourceFactor {
    pub fn from_state(psi: &PureState) -> Result<Self> {
        if psi.layout().dims().iter().any(|&d| d != 2) {
            return Err(Error::InvalidStrategy("resource factors must be qubit registers".into()));
        }
        Ok(Self { labels: psi.layout().labels().to_vec(), amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect() })
    }

    pub fn to_state(&self) -> Result<PureState> {
        let layout = RegisterLayout::qubits(&self.labels)?;
        let amps = CVector::from_iterator(self.amplitudes.len(), self.amplitudes.iter().map(|[re, im]| c(*re, *im)));
        PureState::new(layout, amps)
    }
}

/// A value chosen by a classical key, falling back to `default`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Keyed<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<T>,
    #[serde(default = "BTreeMap::new", skip_serializing_if = "BTreeMap::is_empty")]
    pub table: BTreeMap<String, T>,
}

impl<T> Keyed<T> {
    pub fn uniform(value: T) -> Self {
        Self { default: Some(value), table: BTreeMap::new() }
    }

    pub fn empty() -> Self {
        Self { default: None, table: BTreeMap::new() }
    }

    pub fn insert(&mut self, key: impl Into<String>, value: T) {
        self.table.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<&T> {
        self.table.get(key).or(self.default.as_ref())
    }

    pub fn values(&self) -> impl Iterator<Item = &T> {
        self.default.iter().chain(self.table.values())
    }
}

/// Key for round-2 tables: `"<x>|<y>"`.
pub fn joint_key(x: &[bool], y: &[bool]) -> String {
    format!("{}|{}", bit_string(x), bit_string(y))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub m0: Vec<String>,
    pub m0p: Vec<String>,
    pub m1: Vec<String>,
    pub m1p: Vec<String>,
}

impl Partition {
    /// `M = M₀M₁`, held by Alice in round 2.
    pub fn m(&self) -> Vec<String> {
        self.m0.iter().chain(&self.m1).cloned().collect()
    }

    /// `M' = M₀'M₁'`, held by Bob in round 2.
    pub fn mp(&self) -> Vec<String> {
        self.m0p.iter().chain(&self.m1p).cloned().collect()
    }

    pub fn side(&self, s: bool) -> Vec<String> {
        if s {
            self.mp()
        } else {
            self.m()
        }
    }
}

/// Round-2 recovery channel `M → Q` (or `M' → Q`) written as a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoder {
    pub circuit: Circuit,
    pub wires: Vec<String>,
    /// Wire that carries the recovered qubit.
    pub output: String,
}

impl Decoder {
    /// Returns the qubit on `wire` untouched.
    pub fn identity(wire: &str) -> Self {
        Self { circuit: Circuit::new(1, crate::circuits::GateSet::canonical()), wires: vec![wire.to_string()], output: wire.to_string() }
    }
}

/// Two-outcome round-2 measurement producing a guess for the referee's bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Povm {
    /// The guess is the value of `bit` after running `circuit`.
    Measure { circuit: Circuit, wires: Vec<String>, bit: String },
    /// Guess 0 with probability `p0`, independent of the state.
    Constant { p0: f64 },
}

impl Povm {
    /// Measures `wire` in the computational basis.
    pub fn computational(wire: &str, bit: &str) -> Self {
        let mut circuit = Circuit::new(1, crate::circuits::GateSet::canonical());
        circuit.measure(0, bit);
        Povm::Measure { circuit, wires: vec![wire.to_string()], bit: bit.to_string() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Round2 {
    Routing {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder0: Option<Keyed<Decoder>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decoder1: Option<Keyed<Decoder>>,
    },
    Bb84 {
        povm_m: Keyed<Povm>,
        povm_mp: Keyed<Povm>,
    },
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A complete attack. Wires listed for a party but absent from the resource
/// start in |0⟩; `alice_wires` must contain `Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strategy {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub name: String,
    pub resource: Vec<ResourceFactor>,
    pub alice_wires: Vec<String>,
    pub bob_wires: Vec<String>,
    /// Keyed by the bit string of `x`.
    pub alice_round1: Keyed<Circuit>,
    /// Keyed by the bit string of `y`.
    pub bob_round1: Keyed<Circuit>,
    pub partition: Partition,
    /// Round-2 objects are keyed by [`joint_key`].
    pub round2: Round2,
    /// Whether round-2 circuits read first-round measurement bits.
    #[serde(default)]
    pub decoders_read_outcomes: bool,
}

/// Round-2 circuit together with the register labels it runs on.
pub(crate) struct Round2Circuit<'a> {
    pub circuit: &'a Circuit,
    pub wires: &'a [String],
}

impl Strategy {
    pub fn task(&self) -> TaskKind {
        match self.round2 {
            Round2::Routing { .. } => TaskKind::Routing,
            Round2::Bb84 { .. } => TaskKind::Bb84,
        }
    }

    /// Number of qubits held by Alice and Bob in round 1 (`q`).
    pub fn qubit_count(&self) -> usize {
        self.alice_wires.len() + self.bob_wires.len()
    }

    /// Global wire order: Alice's wires, then Bob's.
    pub fn global_wires(&self) -> Vec<String> {
        self.alice_wires.iter().chain(&self.bob_wires).cloned().collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn alice_circuit(&self, x: &[bool]) -> Result<&Circuit> {
        self.alice_round1
            .get(&bit_string(x))
            .ok_or_else(|| Error::InvalidStrategy(format!("no round-1 circuit for Alice on x = {}", bit_string(x))))
    }

    pub fn bob_circuit(&self, y: &[bool]) -> Result<&Circuit> {
        self.bob_round1
            .get(&bit_string(y))
            .ok_or_else(|| Error::InvalidStrategy(format!("no round-1 circuit for Bob on y = {}", bit_string(y))))
    }

    pub fn decoder(&self, side: bool, x: &[bool], y: &[bool]) -> Result<&Decoder> {
        let Round2::Routing { decoder0, decoder1 } = &self.round2 else {
            return Err(Error::InvalidStrategy("decoders exist only for routing strategies".into()));
        };
        let table = if side { decoder1 } else { decoder0 };
        table.as_ref().and_then(|t| t.get(&joint_key(x, y))).ok_or(Error::MissingDecoder(side as u8))
    }

    pub fn povms(&self, x: &[bool], y: &[bool]) -> Result<(&Povm, &Povm)> {
        let Round2::Bb84 { povm_m, povm_mp } = &self.round2 else {
            return Err(Error::InvalidStrategy("POVMs exist only for BB84 strategies".into()));
        };
        let key = joint_key(x, y);
        let m = povm_m.get(&key).ok_or_else(|| Error::InvalidStrategy(format!("no POVM on M for {key}")))?;
        let mp = povm_mp.get(&key).ok_or_else(|| Error::InvalidStrategy(format!("no POVM on M' for {key}")))?;
        Ok((m, mp))
    }

    /// Round-2 wires that are not first-round wires; they start in |0⟩.
    pub fn round2_ancillas(&self) -> BTreeSet<String> {
        let known: BTreeSet<String> = self.global_wires().into_iter().chain([REFERENCE.to_string()]).collect();
        self.round2_circuits().into_iter().flat_map(|r| r.1.wires.iter().cloned()).filter(|w| !known.contains(w)).collect()
    }

    /// All round-2 circuits with the side (`false` = M) they act on.
    pub(crate) fn round2_circuits(&self) -> Vec<(bool, Round2Circuit<'_>)> {
        let mut out = Vec::new();
        match &self.round2 {
            Round2::Routing { decoder0, decoder1 } => {
                for (side, t) in [(false, decoder0), (true, decoder1)] {
                    for d in t.iter().flat_map(|t| t.values()) {
                        out.push((side, Round2Circuit { circuit: &d.circuit, wires: &d.wires }));
                    }
                }
            }
            Round2::Bb84 { povm_m, povm_mp } => {
                for (side, t) in [(false, povm_m), (true, povm_mp)] {
                    for p in t.values() {
                        if let Povm::Measure { circuit, wires, .. } = p {
                            out.push((side, Round2Circuit { circuit, wires }));
                        }
                    }
                }
            }
        }
        out
    }

    /// `Φ⁺_RQ ⊗ ψ_AB ⊗ |0…0⟩` over the first-round wires.
    pub fn initial_state(&self) -> Result<FactoredState> {
        let mut state = FactoredState::new(vec![PureState::phi_plus(REFERENCE, INPUT_QUBIT)?])?;
        for f in &self.resource {
            state.push(f.to_state()?)?;
        }
        for w in self.global_wires() {
            if w != INPUT_QUBIT && state.factor_index(&w).is_err() {
                state.push(PureState::zeros(&[w.as_str()])?)?;
            }
        }
        Ok(state)
    }

    /// Structural checks for inputs of half-length `n`; returns the round-1
    /// summaries of every keyed circuit (Alice's first).
    pub fn validate(&self, n: usize) -> Result<(Vec<CircuitSummary>, Vec<CircuitSummary>)> {
        let bad = |m: String| Err(Error::InvalidStrategy(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {}", self.schema_version));
        }
        let alice: BTreeSet<&String> = self.alice_wires.iter().collect();
        let bob: BTreeSet<&String> = self.bob_wires.iter().collect();
        if alice.len() != self.alice_wires.len() || bob.len() != self.bob_wires.len() {
            return bad("wire lists contain duplicates".into());
        }
        if let Some(w) = alice.intersection(&bob).next() {
            return bad(format!("wire `{w}` is listed for both parties"));
        }
        if !alice.contains(&INPUT_QUBIT.to_string()) {
            return bad(format!("Alice's wires must include `{INPUT_QUBIT}`"));
        }
        if alice.contains(&REFERENCE.to_string()) || bob.contains(&REFERENCE.to_string()) {
            return bad(format!("`{REFERENCE}` is reserved for the referee"));
        }
        let mut seen = BTreeSet::new();
        for f in &self.resource {
            f.to_state().map_err(|e| Error::InvalidStrategy(format!("resource factor {:?}: {e}", f.labels)))?;
            let owner_a = f.labels.iter().filter(|l| alice.contains(l)).count();
            let owner_b = f.labels.iter().filter(|l| bob.contains(l)).count();
            if owner_a + owner_b != f.labels.len() {
                return bad(format!("resource factor {:?} has labels held by nobody", f.labels));
            }
            for l in &f.labels {
                if l == INPUT_QUBIT || !seen.insert(l.clone()) {
                    return bad(format!("resource label `{l}` is repeated or reserved"));
                }
            }
        }

        let p = &self.partition;
        let mut owner = BTreeMap::new();
        for (part, side_ok) in [(&p.m0, &alice), (&p.m0p, &alice), (&p.m1, &bob), (&p.m1p, &bob)] {
            for w in part {
                if !side_ok.contains(w) {
                    return bad(format!("partition places `{w}` with the wrong party"));
                }
                if owner.insert(w.clone(), ()).is_some() {
                    return bad(format!("partition assigns `{w}` twice"));
                }
            }
        }
        if owner.len() != self.qubit_count() {
            return bad("partition must assign every first-round wire".into());
        }

        let mut summaries = (Vec::new(), Vec::new());
        let mut alice_bits = BTreeSet::new();
        let mut bob_bits = BTreeSet::new();
        for (keyed, wires, vis, bits, out) in [
            (&self.alice_round1, &self.alice_wires, Visibility { x_len: Some(n), ..Default::default() }, &mut alice_bits, &mut summaries.0),
            (&self.bob_round1, &self.bob_wires, Visibility { y_len: Some(n), ..Default::default() }, &mut bob_bits, &mut summaries.1),
        ] {
            if keyed.default.is_none() && keyed.table.len() != 1 << n {
                return bad("round-1 circuits must cover every input".into());
            }
            check_keys(keyed.table.keys(), n, false)?;
            for c in keyed.values() {
                if c.qubits != wires.len() {
                    return bad(format!("round-1 circuit over {} qubits for {} wires", c.qubits, wires.len()));
                }
                let s = c.validate(&vis)?;
                bits.extend(s.bits_any.iter().cloned());
                out.push(s);
            }
        }
        if let Some(b) = alice_bits.intersection(&bob_bits).next() {
            return bad(format!("bit `{b}` is produced by both parties"));
        }

        let r2_bits: BTreeSet<String> = if self.decoders_read_outcomes { alice_bits.union(&bob_bits).cloned().collect() } else { BTreeSet::new() };
        let vis = Visibility { x_len: Some(n), y_len: Some(n), bits: r2_bits };
        let m: BTreeSet<String> = p.m().into_iter().collect();
        let mp: BTreeSet<String> = p.mp().into_iter().collect();
        let ancillas = self.round2_ancillas();
        let first_round: BTreeSet<String> = alice_bits.union(&bob_bits).cloned().collect();
        let mut side_bits = [BTreeSet::new(), BTreeSet::new()];
        for (side, r) in self.round2_circuits() {
            let (own, other) = if side { (&mp, &m) } else { (&m, &mp) };
            for w in r.wires {
                if other.contains(w) || (!own.contains(w) && !ancillas.contains(w)) {
                    return bad(format!("round-2 circuit on side {} touches `{w}`", side as u8));
                }
            }
            if r.circuit.qubits != r.wires.len() {
                return bad("round-2 circuit size does not match its wires".into());
            }
            let summary = r.circuit.validate(&vis)?;
            if let Some(b) = summary.bits_any.intersection(&first_round).next() {
                return bad(format!("round-2 circuit reuses first-round bit `{b}`"));
            }
            side_bits[side as usize].extend(summary.bits_any);
        }
        if let Some(b) = side_bits[0].intersection(&side_bits[1]).next() {
            return bad(format!("bit `{b}` is produced on both sides in round 2"));
        }
        match &self.round2 {
            Round2::Routing { decoder0, decoder1 } => {
                for t in [decoder0, decoder1].into_iter().flatten() {
                    check_keys(t.table.keys(), n, true)?;
                    for d in t.values() {
                        if !d.wires.contains(&d.output) {
                            return bad(format!("decoder output `{}` is not one of its wires", d.output));
                        }
                    }
                }
            }
            Round2::Bb84 { povm_m, povm_mp } => {
                for t in [povm_m, povm_mp] {
                    check_keys(t.table.keys(), n, true)?;
                    for p in t.values() {
                        match p {
                            Povm::Constant { p0 } if !(0.0..=1.0).contains(p0) => return bad(format!("constant POVM p0 = {p0}")),
                            Povm::Measure { circuit, bit, .. } => {
                                let s = circuit.validate(&vis)?;
                                if !s.bits_always.contains(bit) {
                                    return bad(format!("POVM circuit does not always set `{bit}`"));
                                }
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        Ok(summaries)
    }
}

fn check_keys<'a>(keys: impl Iterator<Item = &'a String>, n: usize, joint: bool) -> Result<()> {
    for k in keys {
        let parts: Vec<&str> = if joint { k.split('|').collect() } else { vec![k.as_str()] };
        let ok = parts.len() == if joint { 2 } else { 1 } && parts.iter().all(|p| p.len() == n && p.chars().all(|c| c == '0' || c == '1'));
        if !ok {
            return Err(Error::InvalidStrategy(format!("malformed key `{k}` for n = {n}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::library::{depolarized_routing, x_only_bb84, x_only_routing};

    #[test]
    fn initial_state_has_reference_pair_and_ancillas() {
        let s = depolarized_routing(0.3).unwrap();
        let st = s.initial_state().unwrap();
        assert_eq!(st.num_factors(), 3);
        assert_eq!(st.factor_of("Q").unwrap().layout().labels(), &["R".to_string(), "Q".to_string()]);
        assert!(st.factor_of("J").is_ok());
    }

    #[test]
    fn validation_catches_structural_errors() {
        let good = x_only_routing(2).unwrap();
        good.validate(2).unwrap();

        let mut s = good.clone();
        s.partition.m0p.clear();
        assert!(s.validate(2).is_err(), "unassigned wire");

        let mut s = good.clone();
        s.partition.m1.push("S".into());
        assert!(s.validate(2).is_err(), "wire assigned to the wrong party");

        let mut s = good.clone();
        s.alice_wires.retain(|w| w != INPUT_QUBIT);
        assert!(s.validate(2).is_err(), "missing Q");

        let mut s = good.clone();
        if let Round2::Routing { decoder1, .. } = &mut s.round2 {
            *decoder1 = Some(Keyed::uniform(Decoder::identity(INPUT_QUBIT)));
        }
        assert!(s.validate(2).is_err(), "decoder on the wrong side");

        good.validate(3).unwrap();
        let mut s = good.clone();
        s.alice_round1.table.insert("0".into(), Circuit::new(2, crate::circuits::GateSet::canonical()));
        assert!(s.validate(2).is_err(), "malformed key");

        let mut bb = x_only_bb84(1).unwrap();
        if let Round2::Bb84 { povm_mp, .. } = &mut bb.round2 {
            *povm_mp = Keyed::uniform(Povm::computational("C", "a0"));
        }
        assert!(bb.validate(1).is_err(), "round-2 bit collides with round 1");
    }

    #[test]
    fn round1_reads_only_own_input() {
        let mut s = x_only_routing(1).unwrap();
        let c = s.alice_round1.default.as_mut().unwrap();
        c.instructions.insert(0, Instruction::Conditional { predicate: crate::circuits::Predicate::Y { index: 0 }, then_branch: vec![], else_branch: vec![] });
        assert!(s.validate(1).is_err());
    }

    #[test]
    fn threshold_constant() {
        assert_eq!(crate::tasks::EPS0_ROUTING, 3f64.sqrt() / 4.0);
    }
}
