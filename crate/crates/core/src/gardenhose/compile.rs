//! Teleportation attacks compiled from garden-hose protocols.
//!
//! Every hose is an EPR pair `Φ⁺(hA_k, hB_k)`; every connection of ends `(u, v)`
//! is a Bell measurement `CNOT(u → v)`, `H(u)`, then `u` and `v` measured. With
//! outcomes `m_u, m_v` the teleported qubit picks up `X^{m_v} Z^{m_u}` (up to
//! phase), so the Pauli frame along the water path is `fx = ⊕ m_v`,
//! `fz = ⊕ m_u`. The receiver undoes it by applying `X^fx`, then `Z^fz`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::protocol::{evaluate_flow, GardenHoseProtocol, Side};
use crate::circuits::gateset::library_gate;
use crate::circuits::{Circuit, GateSet, Instruction, Predicate};
use crate::qcore::linalg::CMatrix;
use crate::qcore::{LabeledState, PureState};
use crate::tasks::function::{all_inputs, bit_string};
use crate::tasks::strategy::{joint_key, Decoder, Keyed, Partition, ResourceFactor, Round2, Strategy, INPUT_QUBIT, REFERENCE};
use crate::{Error, Result, SCHEMA_VERSION};

pub fn alice_wire(hose: usize) -> String {
    format!("hA{hose}")
}

pub fn bob_wire(hose: usize) -> String {
    format!("hB{hose}")
}

fn end_label(side: Side, hose: Option<usize>) -> String {
    match (side, hose) {
        (_, None) => INPUT_QUBIT.to_string(),
        (Side::Alice, Some(h)) => alice_wire(h),
        (Side::Bob, Some(h)) => bob_wire(h),
    }
}

/// Measurement bit carrying the outcome of wire `label`.
pub fn bit_name(label: &str) -> String {
    format!("m_{label}")
}

fn bell_gates() -> GateSet {
    GateSet::from_names(&["CNOT", "H"]).expect("library gates")
}

fn pauli_gates() -> GateSet {
    GateSet::from_names(&["X", "Z"]).expect("library gates")
}

fn bell_measure(c: &mut Circuit, u: usize, v: usize, labels: &[String]) -> Result<()> {
    c.gate("CNOT", &[u, v])?.gate("H", &[u])?;
    c.measure(u, &bit_name(&labels[u])).measure(v, &bit_name(&labels[v]));
    Ok(())
}

/// Per-input outcome of compilation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompiledAttack {
    pub strategy: Strategy,
    pub exit_side: Side,
    /// Wire that ends up holding the routed qubit.
    pub output: String,
    pub frame_x: Vec<String>,
    pub frame_z: Vec<String>,
}

struct Frame {
    exit_side: Side,
    output: String,
    fx: Vec<String>,
    fz: Vec<String>,
}

fn frame(p: &GardenHoseProtocol, x: &[bool], y: &[bool]) -> Result<Frame> {
    let flow = evaluate_flow(p, x, y)?;
    let (mut fx, mut fz) = (Vec::new(), Vec::new());
    for (side, first, second) in flow.connections() {
        fz.push(bit_name(&end_label(side, first)));
        fx.push(bit_name(&end_label(side, Some(second))));
    }
    let output = match flow.exit_end {
        Some(e) => end_label(e.side, Some(e.hose)),
        None => INPUT_QUBIT.to_string(),
    };
    Ok(Frame { exit_side: flow.exit_side, output, fx, fz })
}

fn correction(output: &str, fx: &[String], fz: &[String]) -> Result<Decoder> {
    let mut c = Circuit::new(1, pauli_gates());
    let x = c.gate_instruction("X", &[0])?;
    let z = c.gate_instruction("Z", &[0])?;
    for (bits, gate) in [(fx, x), (fz, z)] {
        if !bits.is_empty() {
            c.conditional(Predicate::parity_of_bits(bits), vec![gate], vec![]);
        }
    }
    Ok(Decoder { circuit: c, wires: vec![output.to_string()], output: output.to_string() })
}

/// The attack for all inputs. Round-1 circuits use the gate set {CNOT, H};
/// all of Alice's wires go to `M₀`, all of Bob's to `M₁'`, and each decoder,
/// keyed by `x|y`, reads the outcomes on the water path.
pub fn compile_strategy(p: &GardenHoseProtocol) -> Result<Strategy> {
    p.validate()?;
    let hoses = p.num_hoses;
    let alice_wires: Vec<String> = std::iter::once(INPUT_QUBIT.to_string()).chain((0..hoses).map(alice_wire)).collect();
    let bob_wires: Vec<String> = (0..hoses).map(bob_wire).collect();

    let mut alice_round1 = Keyed::empty();
    for (key, cfg) in &p.alice {
        let mut c = Circuit::new(alice_wires.len(), bell_gates());
        if let Some(t) = cfg.tap {
            bell_measure(&mut c, 0, t + 1, &alice_wires)?;
        }
        for &(a, b) in &cfg.pairs {
            bell_measure(&mut c, a + 1, b + 1, &alice_wires)?;
        }
        alice_round1.insert(key.clone(), c);
    }
    let mut bob_round1 = Keyed::empty();
    for (key, pairs) in &p.bob {
        let mut c = Circuit::new(bob_wires.len(), bell_gates());
        for &(a, b) in pairs {
            bell_measure(&mut c, a, b, &bob_wires)?;
        }
        bob_round1.insert(key.clone(), c);
    }

    let mut decoders = [Keyed::empty(), Keyed::empty()];
    for (x, y) in all_inputs(p.n) {
        let f = frame(p, &x, &y)?;
        decoders[f.exit_side.bit() as usize].insert(joint_key(&x, &y), correction(&f.output, &f.fx, &f.fz)?);
    }
    let [d0, d1] = decoders;

    let resource = (0..hoses).map(|k| ResourceFactor::from_state(&PureState::phi_plus(&alice_wire(k), &bob_wire(k))?)).collect::<Result<Vec<_>>>()?;
    Ok(Strategy {
        schema_version: SCHEMA_VERSION,
        name: format!("garden_hose_ip_n{}", p.n),
        resource,
        partition: Partition { m0: alice_wires.clone(), m1p: bob_wires.clone(), ..Default::default() },
        alice_wires,
        bob_wires,
        alice_round1,
        bob_round1,
        round2: Round2::Routing { decoder0: Some(d0), decoder1: Some(d1) },
        decoders_read_outcomes: true,
    })
}

pub fn compile_to_attack(p: &GardenHoseProtocol, x: &[bool], y: &[bool]) -> Result<CompiledAttack> {
    let strategy = compile_strategy(p)?;
    let f = frame(p, x, y)?;
    Ok(CompiledAttack { strategy, exit_side: f.exit_side, output: f.output, frame_x: f.fx, frame_z: f.fz })
}

/// Result of the path-restricted teleportation check for one input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TeleportCheck {
    pub x: String,
    pub y: String,
    pub exit_side: Side,
    /// Bell-outcome branches along the water path (`4^connections`).
    pub branches: usize,
    pub min_fidelity: f64,
    pub mean_fidelity: f64,
    /// Largest register simulated densely.
    pub max_qubits: usize,
}

struct Walk<'a> {
    cnot: CMatrix,
    h: CMatrix,
    x: CMatrix,
    z: CMatrix,
    links: &'a [(String, String, String)],
    output: &'a str,
    correct: bool,
    leaves: Vec<(f64, f64)>,
    max_qubits: usize,
}

impl Walk<'_> {
    /// `state` holds `R` and the wire currently carrying the qubit.
    fn go(&mut self, state: PureState, k: usize, fx: bool, fz: bool, prob: f64) -> Result<()> {
        let Some((u, v, far)) = self.links.get(k) else {
            let mut s = state;
            if self.correct {
                if fx {
                    s.apply_unitary(&[self.output], &self.x)?;
                }
                if fz {
                    s.apply_unitary(&[self.output], &self.z)?;
                }
            }
            let target = PureState::phi_plus(REFERENCE, self.output)?;
            let fid = s.reorder(&[REFERENCE, self.output])?.inner(&target)?.norm();
            self.leaves.push((prob, fid));
            return Ok(());
        };
        let carrier = state.layout().labels()[1].clone();
        let fresh = if &carrier == u { v } else { u };
        let mut joint = state.tensor(&PureState::phi_plus(fresh, far)?)?;
        self.max_qubits = self.max_qubits.max(joint.layout().len());
        joint.apply_unitary(&[u.as_str(), v.as_str()], &self.cnot)?;
        joint.apply_unitary(&[u.as_str()], &self.h)?;
        for mu in 0..2 {
            let (pu, Some(a)) = LabeledState::project(&joint, u, mu)? else { continue };
            for mv in 0..2 {
                let (pv, Some(b)) = LabeledState::project(&a, v, mv)? else { continue };
                let rest = b.split_off(u, mu)?.split_off(v, mv)?.reorder(&[REFERENCE, far.as_str()])?;
                self.go(rest, k + 1, fx ^ (mv == 1), fz ^ (mu == 1), prob * pu * pv)?;
            }
        }
        Ok(())
    }
}

/// Follows the qubit along the water path only, branching over all Bell
/// outcomes, so at most four qubits are ever dense. With `correct` the Pauli
/// frame is undone before comparing with `Φ⁺`.
pub fn verify_teleportation(p: &GardenHoseProtocol, x: &[bool], y: &[bool], correct: bool) -> Result<TeleportCheck> {
    let flow = evaluate_flow(p, x, y)?;
    let f = frame(p, x, y)?;
    let mut links = Vec::new();
    for (side, first, second) in flow.connections() {
        let u = end_label(side, first);
        let v = end_label(side, Some(second));
        links.push((u, v, String::new()));
    }
    // the fresh end of each link is the one the water enters through; its
    // partner across the hose is where the qubit lands
    let mut carrier = INPUT_QUBIT.to_string();
    for (u, v, far) in links.iter_mut() {
        let fresh = if *u == carrier { v.clone() } else { u.clone() };
        *far = match fresh.strip_prefix("hA") {
            Some(k) => format!("hB{k}"),
            None => format!("hA{}", fresh.strip_prefix("hB").ok_or_else(|| Error::InvalidProtocol("tap on a non-hose end".into()))?),
        };
        carrier = far.clone();
    }
    if carrier != f.output {
        return Err(Error::InvalidProtocol(format!("path ends at {carrier}, flow exits at {}", f.output)));
    }
    let gate = |n: &str| library_gate(n).expect("library gate").matrix;
    let mut walk = Walk {
        cnot: gate("CNOT"),
        h: gate("H"),
        x: gate("X"),
        z: gate("Z"),
        links: &links,
        output: &f.output,
        correct,
        leaves: Vec::new(),
        max_qubits: 2,
    };
    walk.go(PureState::phi_plus(REFERENCE, INPUT_QUBIT)?, 0, false, false, 1.0)?;
    let min = walk.leaves.iter().map(|l| l.1).fold(f64::INFINITY, f64::min);
    let mean = walk.leaves.iter().map(|(p, fid)| p * fid).sum();
    Ok(TeleportCheck {
        x: bit_string(x),
        y: bit_string(y),
        exit_side: flow.exit_side,
        branches: walk.leaves.len(),
        min_fidelity: min,
        mean_fidelity: mean,
        max_qubits: walk.max_qubits,
    })
}

/// Bell measurement counts per party for every input key.
pub fn measurement_counts(s: &Strategy) -> BTreeMap<String, usize> {
    let count = |c: &Circuit| c.instructions.iter().filter(|i| matches!(i, Instruction::Measure { .. })).count() / 2;
    s.alice_round1.table.iter().map(|(k, c)| (format!("alice:{k}"), count(c))).chain(s.bob_round1.table.iter().map(|(k, c)| (format!("bob:{k}"), count(c)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gardenhose::protocol::{build_ip_protocol, AliceConfig, Wiring};
    use crate::tasks::evaluate::{evaluate_input, SimOptions};
    use crate::tasks::function::BooleanFunction;

    fn one_hose() -> GardenHoseProtocol {
        GardenHoseProtocol {
            schema_version: SCHEMA_VERSION,
            n: 1,
            num_hoses: 1,
            alice: ["0", "1"].iter().map(|k| (k.to_string(), AliceConfig { tap: Some(0), pairs: vec![] })).collect(),
            bob: ["0", "1"].iter().map(|k| (k.to_string(), vec![])).collect(),
        }
    }

    #[test]
    fn single_teleportation_all_outcomes() {
        let p = one_hose();
        let c = verify_teleportation(&p, &[false], &[false], true).unwrap();
        assert_eq!(c.branches, 4);
        assert!((c.min_fidelity - 1.0).abs() < 1e-12);
        assert_eq!(c.exit_side, Side::Bob);
        let u = verify_teleportation(&p, &[false], &[false], false).unwrap();
        assert!(u.mean_fidelity <= 0.5 + 1e-12);
    }

    #[test]
    fn compiled_strategy_routes_ip_n1() {
        let p = build_ip_protocol(1, Wiring::Pruned).unwrap();
        let s = compile_strategy(&p).unwrap();
        s.validate(1).unwrap();
        let f = BooleanFunction::ip(1).unwrap();
        for (x, y) in f.inputs() {
            let r = evaluate_input(&s, &f, &x, &y, &SimOptions::sampled(64, 3)).unwrap();
            assert!(r.epsilon < 1e-6, "x = {x:?}, y = {y:?}, eps = {}", r.epsilon);
        }
    }

    #[test]
    fn path_check_ip_n1() {
        let p = build_ip_protocol(1, Wiring::Pruned).unwrap();
        for (x, y) in all_inputs(1) {
            let c = verify_teleportation(&p, &x, &y, true).unwrap();
            assert!((c.min_fidelity - 1.0).abs() < 1e-9);
            assert!(c.max_qubits <= 4);
            assert_eq!(c.exit_side.bit(), crate::tasks::Builtin::Ip.eval(&x, &y));
            let u = verify_teleportation(&p, &x, &y, false).unwrap();
            assert!(u.mean_fidelity <= 0.5 + 1e-9);
        }
    }
}
