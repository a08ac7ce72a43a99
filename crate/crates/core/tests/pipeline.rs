use posveri::bounds::{audit_entry, CorpusEntry};
use posveri::gardenhose::{build_ip_protocol, compile_strategy, cost_report, GardenHoseProtocol, Wiring};
use posveri::reduction::{smp_simulation, SmpOptions};
use posveri::tasks::evaluate::{evaluate_strategy, SimOptions};
use posveri::tasks::library::{depolarized_routing, x_only_bb84};
use posveri::tasks::{BooleanFunction, Builtin, Strategy, EPS0_BB84, EPS0_ROUTING};

#[test]
fn strategies_survive_json_and_evaluate_identically() {
    let s = x_only_bb84(2).unwrap();
    let back = Strategy::from_json(&s.to_json().unwrap()).unwrap();
    let f = BooleanFunction::builtin(Builtin::XOnly, 2).unwrap();
    let a = evaluate_strategy(&s, &f, EPS0_BB84, &SimOptions::default()).unwrap();
    let b = evaluate_strategy(&back, &f, EPS0_BB84, &SimOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.worst_epsilon, 0.0);
}

#[test]
fn protocol_json_round_trip_keeps_costs() {
    let p = build_ip_protocol(2, Wiring::Pruned).unwrap();
    let back = GardenHoseProtocol::from_json(&p.to_json().unwrap()).unwrap();
    assert_eq!(cost_report(&p).unwrap(), cost_report(&back).unwrap());
    assert_eq!((cost_report(&p).unwrap().q, cost_report(&p).unwrap().c_m), (32, 26));
}

#[test]
fn sampled_garden_hose_reduction_has_no_referee_errors() {
    let s = compile_strategy(&build_ip_protocol(2, Wiring::Pruned).unwrap()).unwrap();
    let f = BooleanFunction::ip(2).unwrap();
    let opts = SmpOptions { sim: SimOptions::sampled(200, 5), verify_every: 50, slack: 0.05, ..Default::default() };
    let r = smp_simulation(&s, &f, &opts).unwrap();
    assert!(r.ok);
    assert_eq!(r.rows.len(), 16);
    assert!(r.rows.iter().all(|row| row.failure == 0.0 && row.abstain == 0.0));
    assert!(r.max_message_bits <= r.lhs);
    assert_eq!(r.reconstruction_mismatches, 0);
}

#[test]
fn noisy_strategy_audit_uses_scaled_error() {
    let e = CorpusEntry { strategy: depolarized_routing(0.05).unwrap(), function: BooleanFunction::builtin(Builtin::Const0, 1).unwrap(), sim: SimOptions::default() };
    let a = audit_entry(&e).unwrap();
    let c = a.certificate.unwrap();
    assert!((c.epsilon - (0.75f64 * 0.05).sqrt()).abs() < 1e-9);
    let r = a.report.unwrap();
    assert_eq!(r.satisfied, Some(true));
    assert_eq!(r.parameters.eps0, Some(EPS0_ROUTING));
}
