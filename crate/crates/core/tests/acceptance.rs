//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::time::{Duration, Instant};

use posveri::bounds::{audit_corpus, cleve_ip_bound, default_corpus, eps_grid, nayak_ip_bound, sweep};
use posveri::circuits::{ceil_log2, AppliedGate, GateSet, MeasurementRecord, Transcript};
use posveri::gardenhose::{build_ip_protocol, check_ip_exhaustive, compile_strategy, verify_teleportation, Wiring};
use posveri::qcore::random::seeded_rng;
use posveri::reduction::battery::{cit_battery, continuity_battery, hmin_closed_forms, routing_floor_battery};
use posveri::reduction::{decode, encode_transcript, encoded_length, smp_simulation, SmpOptions};
use posveri::tasks::evaluate::SimOptions;
use posveri::tasks::library::depolarized_routing;
use posveri::tasks::{all_inputs, honest_report, BooleanFunction, Builtin, TaskKind, EPS0_ROUTING};
use rand::Rng;

fn report(n: u32, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

#[test]
fn criterion_1_honest_provers_are_exact() {
    let start = Instant::now();
    let mut worst_bb84: f64 = 0.0;
    let mut worst_routing: f64 = 0.0;
    let mut inputs = 0;
    for n in 1..=3 {
        let f = BooleanFunction::ip(n).unwrap();
        let b = honest_report(TaskKind::Bb84, &f).unwrap();
        let r = honest_report(TaskKind::Routing, &f).unwrap();
        worst_bb84 = b.rows.iter().map(|row| (1.0 - row.success_prob).abs()).fold(worst_bb84, f64::max);
        worst_routing = r.rows.iter().map(|row| row.epsilon).fold(worst_routing, f64::max);
        inputs += b.rows.len();
    }
    let t = start.elapsed();
    let ok = worst_bb84 <= 1e-9 && worst_routing <= 1e-9 && inputs == 4 + 16 + 64 && t < Duration::from_secs(10);
    report(1, ok, format!("inputs={inputs} max|1-p_bb84|={worst_bb84:e} max eps_routing={worst_routing:e} time={:.2}s", secs(t)));
    assert!(ok);
}

#[test]
fn criterion_2_garden_hose_routes_to_ip() {
    let start = Instant::now();
    let mut flows = 0;
    for n in 1..=4 {
        for w in [Wiring::Full, Wiring::Pruned] {
            flows += check_ip_exhaustive(&build_ip_protocol(n, w).unwrap()).unwrap();
        }
    }
    let t_flow = start.elapsed();
    let start = Instant::now();
    let mut min_fid = f64::INFINITY;
    let mut max_fid = f64::NEG_INFINITY;
    let mut branches = 0;
    for n in 1..=2 {
        let p = build_ip_protocol(n, Wiring::Pruned).unwrap();
        for (x, y) in all_inputs(n) {
            let c = verify_teleportation(&p, &x, &y, true).unwrap();
            assert_eq!(c.exit_side.bit(), Builtin::Ip.eval(&x, &y));
            min_fid = min_fid.min(c.min_fidelity);
            max_fid = max_fid.max(c.mean_fidelity);
            branches += c.branches;
        }
    }
    let t_q = start.elapsed();
    let expected_flows = 2 * (4 + 16 + 64 + 256);
    let ok = flows == expected_flows && (min_fid - 1.0).abs() <= 1e-9 && (max_fid - 1.0).abs() <= 1e-9 && t_flow < Duration::from_secs(5) && t_q < Duration::from_secs(60);
    report(
        2,
        ok,
        format!("flow inputs={flows} ({:.2}s); teleport branches={branches} fidelity in [{min_fid:.12}, {max_fid:.12}] ({:.2}s)", secs(t_flow), secs(t_q)),
    );
    assert!(ok);
}

fn random_transcript(rng: &mut impl Rng, q: usize, c_g: usize, c_m: usize, gs: &GateSet) -> Transcript {
    let applied_gates = (0..c_g)
        .map(|_| {
            let gate = rng.random_range(0..gs.len());
            let targets = if gs.gate(gate).unwrap().arity == 1 {
                vec![rng.random_range(0..q)]
            } else {
                let a = rng.random_range(0..q);
                let b = (a + rng.random_range(1..q)) % q;
                vec![a, b]
            };
            AppliedGate { gate, targets }
        })
        .collect();
    let mut wires: Vec<usize> = (0..q).collect();
    for i in 0..c_m {
        let j = rng.random_range(i..q);
        wires.swap(i, j);
    }
    let measurements = wires[..c_m].iter().map(|&target| MeasurementRecord { target, outcome: rng.random_bool(0.5) }).collect();
    Transcript { applied_gates, measurements }
}

#[test]
fn criterion_3_encoding_arithmetic() {
    let gs = GateSet::canonical();
    let mut rng = seeded_rng(2024);
    let mut length_ok = 0;
    let mut round_trip_ok = 0;
    let cases = 1000;
    for _ in 0..cases {
        let q = rng.random_range(2..=64);
        let c_g = rng.random_range(0..=50);
        // measured wires are distinct, so at most q measurements
        let c_m = rng.random_range(0..=50usize.min(q));
        let t = random_transcript(&mut rng, q, c_g, c_m, &gs);
        let formula = (ceil_log2(q) + 1) * (2 * c_g + c_m);
        let m = encode_transcript(&t, q, &gs).unwrap();
        if m.len() == formula && encoded_length(q, &gs, c_g, c_m).unwrap() == formula {
            length_ok += 1;
        }
        if decode(&m.bits, q, &gs, c_g).map(|d| d == t).unwrap_or(false) {
            round_trip_ok += 1;
        }
    }
    let ok = length_ok == cases && round_trip_ok == cases;
    report(3, ok, format!("length matches={length_ok}/{cases} round trips={round_trip_ok}/{cases}"));
    assert!(ok);
}

#[test]
fn criterion_4_referee_soundness() {
    let start = Instant::now();
    let s = compile_strategy(&build_ip_protocol(1, Wiring::Pruned).unwrap()).unwrap();
    let f = BooleanFunction::ip(1).unwrap();
    // Every 16th branch is also decoded and replayed against the simulator.
    let opts = SmpOptions { sim: SimOptions::exhaustive(1 << 20), eps0: Some(EPS0_ROUTING), verify_every: 16, ..Default::default() };
    let gh = smp_simulation(&s, &f, &opts).unwrap();
    let gh_branches: usize = gh.rows.iter().map(|r| r.branches).sum();
    let gh_ok = gh.ok && gh.rows.iter().all(|r| r.epsilon <= 1e-9 && r.failure == 0.0 && r.abstain == 0.0) && gh.reconstruction_mismatches == 0;
    let t_gh = start.elapsed();

    let mut noisy_ok = true;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut max_eps: f64 = 0.0;
    let c0 = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
    for (k, p) in [0.01, 0.03, 0.05].into_iter().enumerate() {
        let s = depolarized_routing(p).unwrap();
        let opts = SmpOptions { sim: SimOptions::sampled(10_000, 100 + k as u64), eps0: Some(EPS0_ROUTING), verify_every: 1, slack: 0.05, ..Default::default() };
        let r = smp_simulation(&s, &c0, &opts).unwrap();
        for row in &r.rows {
            max_eps = max_eps.max(row.epsilon);
            let bound = row.epsilon / EPS0_ROUTING + 0.05;
            worst_excess = worst_excess.max(row.failure - bound);
            noisy_ok &= row.epsilon <= 0.2 && row.failure <= bound;
        }
        noisy_ok &= r.ok;
    }
    let ok = gh_ok && noisy_ok;
    report(
        4,
        ok,
        format!(
            "garden-hose n=1: branches={gh_branches} failures=0 abstentions=0 replayed={} mismatches={} ({:.1}s); noisy: max eps={max_eps:.3} max(failure-bound)={worst_excess:.4}",
            gh.reconstructions_checked,
            gh.reconstruction_mismatches,
            secs(t_gh)
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_entropy_batteries() {
    let start = Instant::now();
    let results = [
        cit_battery(1000, 51).unwrap(),
        continuity_battery(1000, 52).unwrap(),
        routing_floor_battery(100, 53).unwrap(),
        hmin_closed_forms().unwrap(),
    ];
    let t = start.elapsed();
    let ok = results.iter().all(|r| r.passed()) && t < Duration::from_secs(120);
    let detail: Vec<String> = results.iter().map(|r| format!("{} n={} worst={:.3e}", r.name, r.samples, r.worst_margin)).collect();
    report(5, ok, format!("{} ({:.2}s)", detail.join("; "), secs(t)));
    assert!(ok);
}

#[test]
fn criterion_6_bound_formulas() {
    let exact = nayak_ip_bound(100, 0.0) == 99.5 && cleve_ip_bound(100, 0.0) == 99.5;
    let rows = sweep(1..=512, &eps_grid());
    let bad: Vec<_> = rows.iter().filter(|r| !r.nayak_ge_cleve).collect();
    let ok = exact && bad.is_empty();
    let first = bad.first().map(|r| format!("; first counterexample n={} eps={} nayak={:.6} cleve={:.6}", r.n, r.eps, r.nayak, r.cleve)).unwrap_or_default();
    report(6, ok, format!("exact values={exact}; grid points={} with nayak<cleve={}{first}", rows.len(), bad.len()));
    assert!(ok);
}

#[test]
fn criterion_7_end_to_end_audit() {
    let corpus = default_corpus(10_000, 77).unwrap();
    let audit = audit_corpus(&corpus).unwrap();
    let certified = audit.entries.iter().filter(|e| e.certificate.is_some()).count();
    let ip_certified = audit.entries.iter().filter(|e| e.function.starts_with("ip") && e.certificate.is_some()).count();
    let ok = audit.counterexamples == 0 && ip_certified == 2;
    report(7, ok, format!("strategies={} certified={certified} (ip: {ip_certified}) counterexamples={}", audit.entries.len(), audit.counterexamples));
    assert!(ok);
}
