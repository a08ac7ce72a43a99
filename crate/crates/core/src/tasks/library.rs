//! Small reference strategies used by tests, the CLI and the audit corpus.

use super::strategy::{Decoder, Keyed, Partition, Povm, ResourceFactor, Round2, Strategy, INPUT_QUBIT};
use crate::circuits::{Circuit, GateSet, Instruction, Predicate};
use crate::qcore::linalg::c;
use crate::qcore::PureState;
use crate::{Result, SCHEMA_VERSION};

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn x_parity(n: usize) -> Predicate {
    Predicate::Parity { x: (0..n).collect(), y: vec![], bits: vec![], invert: false }
}

/// Three CNOTs exchanging local wires `a` and `b`.
pub fn swap_instructions(circuit: &Circuit, a: usize, b: usize) -> Result<Vec<Instruction>> {
    Ok(vec![circuit.gate_instruction("CNOT", &[a, b])?, circuit.gate_instruction("CNOT", &[b, a])?, circuit.gate_instruction("CNOT", &[a, b])?])
}

fn base(name: &str, alice: &[&str], bob: &[&str], alice_c: Circuit, partition: Partition, round2: Round2) -> Strategy {
    Strategy {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        resource: vec![],
        alice_wires: strings(alice),
        bob_wires: strings(bob),
        alice_round1: Keyed::uniform(alice_c),
        bob_round1: Keyed::uniform(Circuit::new(bob.len(), GateSet::canonical())),
        partition,
        round2,
        decoders_read_outcomes: false,
    }
}

/// Alice keeps `Q`; only a side-0 decoder exists. Correct for `f ≡ 0`.
pub fn identity_routing() -> Strategy {
    base(
        "identity_routing",
        &[INPUT_QUBIT],
        &[],
        Circuit::new(1, GateSet::canonical()),
        Partition { m0: strings(&[INPUT_QUBIT]), ..Default::default() },
        Round2::Routing { decoder0: Some(Keyed::uniform(Decoder::identity(INPUT_QUBIT))), decoder1: None },
    )
}

/// Alice keeps `Q`; Bob's decoder outputs a fresh qubit.
pub fn empty_routing() -> Strategy {
    let fresh = Decoder { circuit: Circuit::new(1, GateSet::canonical()), wires: strings(&["Z"]), output: "Z".into() };
    let mut s = identity_routing();
    s.name = "empty_routing".into();
    s.round2 = Round2::Routing { decoder0: Some(Keyed::uniform(Decoder::identity(INPUT_QUBIT))), decoder1: Some(Keyed::uniform(fresh)) };
    s
}

/// Alice swaps `Q` into `M₀'` when the parity of `x` is 1. Correct for the
/// x-only parity function.
pub fn x_only_routing(n: usize) -> Result<Strategy> {
    let mut alice = Circuit::new(2, GateSet::canonical());
    let swap = swap_instructions(&alice, 0, 1)?;
    alice.conditional(x_parity(n), swap, vec![]);
    Ok(base(
        "x_only_routing",
        &[INPUT_QUBIT, "S"],
        &[],
        alice,
        Partition { m0: strings(&[INPUT_QUBIT]), m0p: strings(&["S"]), ..Default::default() },
        Round2::Routing { decoder0: Some(Keyed::uniform(Decoder::identity(INPUT_QUBIT))), decoder1: Some(Keyed::uniform(Decoder::identity("S"))) },
    ))
}

/// Alice measures `Q` in the basis given by the parity of `x` and copies the
/// outcome into `C`, sent to Bob. Correct for the x-only parity function.
pub fn x_only_bb84(n: usize) -> Result<Strategy> {
    let mut alice = Circuit::new(2, GateSet::library());
    let h = alice.gate_instruction("H", &[0])?;
    alice.conditional(x_parity(n), vec![h], vec![]);
    alice.gate("CNOT", &[0, 1])?.measure(0, "a0").measure(1, "a1");
    Ok(base(
        "x_only_bb84",
        &[INPUT_QUBIT, "C"],
        &[],
        alice,
        Partition { m0: strings(&[INPUT_QUBIT]), m0p: strings(&["C"]), ..Default::default() },
        Round2::Bb84 { povm_m: Keyed::uniform(Povm::computational(INPUT_QUBIT, "g")), povm_mp: Keyed::uniform(Povm::computational("C", "g_prime")) },
    ))
}

/// Both sides guess 0 with probability `p0` regardless of the state.
pub fn constant_bb84(p0: f64) -> Strategy {
    base(
        "constant_bb84",
        &[INPUT_QUBIT],
        &[],
        Circuit::new(1, GateSet::canonical()),
        Partition { m0: strings(&[INPUT_QUBIT]), ..Default::default() },
        Round2::Bb84 { povm_m: Keyed::uniform(Povm::Constant { p0 }), povm_mp: Keyed::uniform(Povm::Constant { p0 }) },
    )
}

/// With probability `p` Alice swaps `Q` for a junk qubit `J` that goes to
/// Bob, decided by measuring a biased resource qubit `N`. For `f ≡ 0` this
/// fully depolarizes the routed qubit with probability `p`, so
/// `ε = √(3p/4)`.
pub fn depolarized_routing(p: f64) -> Result<Strategy> {
    let mut alice = Circuit::new(3, GateSet::canonical());
    let swap = swap_instructions(&alice, 0, 2)?;
    alice.measure(1, "a0").conditional(Predicate::Bit { name: "a0".into() }, swap, vec![]);
    let mut s = base(
        "depolarized_routing",
        &[INPUT_QUBIT, "N", "J"],
        &[],
        alice,
        Partition { m0: strings(&[INPUT_QUBIT, "N"]), m0p: strings(&["J"]), ..Default::default() },
        Round2::Routing { decoder0: Some(Keyed::uniform(Decoder::identity(INPUT_QUBIT))), decoder1: Some(Keyed::uniform(Decoder::identity("J"))) },
    );
    let coin = PureState::qubit("N", c((1.0 - p).sqrt(), 0.0), c(p.sqrt(), 0.0))?;
    s.resource.push(ResourceFactor::from_state(&coin)?);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::evaluate::{evaluate_strategy, run_fbb84, run_frouting, SimOptions, EPS0_ROUTING};
    use crate::tasks::function::{BooleanFunction, Builtin};
    use crate::Error;

    fn opts() -> SimOptions {
        SimOptions::default()
    }

    #[test]
    fn identity_routes_constant_zero() {
        let f = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
        let s = identity_routing();
        for (x, y) in f.inputs() {
            assert!(run_frouting(&s, &f, &x, &y, &opts()).unwrap() < 1e-12);
        }
        let g = BooleanFunction::builtin(Builtin::Const1, 1).unwrap();
        assert!(matches!(run_frouting(&s, &g, &[false], &[false], &opts()), Err(Error::MissingDecoder(1))));
    }

    #[test]
    fn x_only_routing_is_exact() {
        for n in 1..=3 {
            let f = BooleanFunction::builtin(Builtin::XOnly, n).unwrap();
            let r = evaluate_strategy(&x_only_routing(n).unwrap(), &f, EPS0_ROUTING, &opts()).unwrap();
            assert!(r.worst_epsilon < 1e-9, "n = {n}");
            assert_eq!(r.delta_fraction, 1.0);
        }
    }

    #[test]
    fn empty_strategy_fails_on_ip() {
        let f = BooleanFunction::ip(2).unwrap();
        let r = evaluate_strategy(&empty_routing(), &f, EPS0_ROUTING, &opts()).unwrap();
        assert!((r.worst_epsilon - 0.75f64.sqrt()).abs() < 1e-9);
        assert_eq!(r.delta_fraction, 10.0 / 16.0);
    }

    #[test]
    fn bb84_reference_values() {
        let f = BooleanFunction::builtin(Builtin::XOnly, 2).unwrap();
        let s = x_only_bb84(2).unwrap();
        for (x, y) in f.inputs() {
            assert!((run_fbb84(&s, &f, &x, &y, &opts()).unwrap() - 1.0).abs() < 1e-12);
        }
        let ip = BooleanFunction::ip(1).unwrap();
        for (x, y) in ip.inputs() {
            assert!((run_fbb84(&constant_bb84(0.5), &ip, &x, &y, &opts()).unwrap() - 0.25).abs() < 1e-12);
            assert!((run_fbb84(&constant_bb84(1.0), &ip, &x, &y, &opts()).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarized_error_matches_closed_form() {
        let f = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
        for p in [0.0, 0.05, 0.2] {
            let e = run_frouting(&depolarized_routing(p).unwrap(), &f, &[true], &[false], &opts()).unwrap();
            assert!((e - (0.75 * p).sqrt()).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn identity_gate_changes_costs_only() {
        let f = BooleanFunction::builtin(Builtin::XOnly, 1).unwrap();
        let s = x_only_bb84(1).unwrap();
        let mut padded = s.clone();
        let c = padded.alice_round1.default.as_mut().unwrap();
        let id = c.gate_instruction("I", &[1]).unwrap();
        c.instructions.insert(0, id);
        let a = evaluate_strategy(&s, &f, 0.11, &opts()).unwrap();
        let b = evaluate_strategy(&padded, &f, 0.11, &opts()).unwrap();
        for (r, t) in a.rows.iter().zip(&b.rows) {
            assert!((r.epsilon - t.epsilon).abs() < 1e-9);
            assert_eq!(t.c_g, r.c_g + 1);
        }
    }

    #[test]
    fn strategies_survive_json() {
        for s in [identity_routing(), x_only_routing(2).unwrap(), x_only_bb84(2).unwrap(), depolarized_routing(0.1).unwrap(), constant_bb84(0.3)] {
            let back = Strategy::from_json(&s.to_json().unwrap()).unwrap();
            assert_eq!(back, s);
        }
    }
}
