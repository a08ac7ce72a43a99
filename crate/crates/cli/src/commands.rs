use posveri::bounds::{
    audit_corpus, cleve_report, default_corpus, depth_report, disj_report, eps_grid, eps_prime_report, main_theorem_audit, nayak_report, sweep, BoundFunction, BoundReport,
    CorpusAudit, CostProfile,
};
use posveri::gardenhose::{build_ip_protocol, check_ip_exhaustive, compile_strategy, cost_report, evaluate_flow, verify_teleportation, CostReport, GardenHoseProtocol, TeleportCheck, Wiring};
use posveri::reduction::{run_batteries, smp_simulation, BatteryCounts, BatteryResult, SmpOptions, SmpReport};
use posveri::tasks::evaluate::SimOptions;
use posveri::tasks::library::{constant_bb84, depolarized_routing, empty_routing, identity_routing, x_only_bb84, x_only_routing};
use posveri::tasks::{all_inputs, bit_string, honest_report, BooleanFunction, Builtin, CorrectnessReport, Strategy, TaskKind};
use posveri::SCHEMA_VERSION;
use serde::Serialize;

use crate::config::{BoundsArgs, Format, GardenhoseArgs, HonestArgs, InvariantArgs, ReduceArgs, RunConfig, WiringArg};
use crate::output::{write_csv, write_json};
use crate::CliError;

/// Honest provers and teleportation checks must be exact up to this.
const EXACT_TOL: f64 = 1e-9;

fn function(name: &str, n: usize) -> Result<BooleanFunction, CliError> {
    let b: Builtin = name.parse().map_err(|e: posveri::Error| CliError::Usage(e.to_string()))?;
    BooleanFunction::builtin(b, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn usage<T>(r: posveri::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

fn threshold(run: &RunConfig, task: TaskKind) -> f64 {
    match task {
        TaskKind::Routing => run.eps0_routing,
        TaskKind::Bb84 => run.eps0_bb84,
    }
}

fn require_seed(run: &RunConfig, what: &str) -> Result<u64, CliError> {
    run.seed.ok_or_else(|| CliError::Usage(format!("{what} is stochastic and needs --seed")))
}

fn violation(ok: bool, what: impl FnOnce() -> String) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Violation(what()))
    }
}

#[derive(Serialize)]
struct HonestCsv {
    schema_version: u32,
    x: String,
    y: String,
    f: bool,
    epsilon: f64,
    success_prob: f64,
}

pub fn honest(run: &RunConfig, a: &HonestArgs) -> Result<(), CliError> {
    let task: TaskKind = usage(a.task.parse())?;
    let f = function(&a.function, a.n)?;
    let mut report: CorrectnessReport = honest_report(task, &f)?;
    report.threshold = threshold(run, task);
    match run.format {
        Format::Json => write_json(run.out.as_deref(), &report)?,
        Format::Csv => {
            let rows: Vec<HonestCsv> = report
                .rows
                .iter()
                .map(|r| HonestCsv { schema_version: SCHEMA_VERSION, x: bit_string(&r.x), y: bit_string(&r.y), f: r.f, epsilon: r.epsilon, success_prob: r.success_prob })
                .collect();
            write_csv(run.out.as_deref(), &rows)?
        }
    }
    violation(report.rows.iter().all(|r| r.epsilon <= EXACT_TOL), || format!("honest {} prover has error {}", task.name(), report.worst_epsilon))
}

#[derive(Serialize)]
struct GardenhoseRow {
    schema_version: u32,
    x: String,
    y: String,
    ip: bool,
    exit_side: String,
    q: usize,
    c_m: usize,
}

#[derive(Serialize)]
struct GardenhoseReport {
    schema_version: u32,
    n: usize,
    wiring: String,
    inputs_checked: usize,
    rows: Vec<GardenhoseRow>,
    costs: CostReport,
    audit: BoundReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    teleportation: Vec<TeleportCheck>,
    ok: bool,
}

pub fn gardenhose(run: &RunConfig, a: &GardenhoseArgs) -> Result<(), CliError> {
    if a.quantum_verify && a.n > 2 {
        return Err(CliError::Usage("--quantum-verify supports n ≤ 2".into()));
    }
    let wiring = match a.wiring {
        WiringArg::Full => Wiring::Full,
        WiringArg::Pruned => Wiring::Pruned,
    };
    let p: GardenHoseProtocol = usage(build_ip_protocol(a.n, wiring))?;
    let checked = check_ip_exhaustive(&p)?;
    let costs = cost_report(&p)?;
    let mut rows = Vec::new();
    let mut teleportation = Vec::new();
    for (x, y) in all_inputs(a.n) {
        let flow = evaluate_flow(&p, &x, &y)?;
        let c_m = p.alice_measurements(&x)? + p.bob_pairs(&y)?.len();
        rows.push(GardenhoseRow {
            schema_version: SCHEMA_VERSION,
            x: bit_string(&x),
            y: bit_string(&y),
            ip: Builtin::Ip.eval(&x, &y),
            exit_side: flow.exit_side.name().to_string(),
            q: p.num_hoses,
            c_m,
        });
        if a.quantum_verify {
            teleportation.push(verify_teleportation(&p, &x, &y, true)?);
        }
    }
    // Bell measurements count as measurements; no first-round gates.
    let audit = main_theorem_audit(CostProfile::canonical(costs.q, 0, costs.c_m), a.n, 0.0, 0.0, run.eps0_routing, BoundFunction::Ip);
    let flows_ok = rows.iter().all(|r| (r.exit_side == "bob") == r.ip);
    let tele_ok = teleportation.iter().all(|t| t.min_fidelity >= 1.0 - EXACT_TOL);
    let ok = flows_ok && tele_ok && audit.satisfied == Some(true);
    let report = GardenhoseReport {
        schema_version: SCHEMA_VERSION,
        n: a.n,
        wiring: format!("{:?}", a.wiring).to_lowercase(),
        inputs_checked: checked,
        rows,
        costs,
        audit,
        teleportation,
        ok,
    };
    match run.format {
        Format::Json => write_json(run.out.as_deref(), &report)?,
        Format::Csv => write_csv(run.out.as_deref(), &report.rows)?,
    }
    violation(ok, || "garden-hose protocol failed a check".into())
}

fn builtin_strategy(spec: &str, n: usize) -> Result<Strategy, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (spec, None),
    };
    let num = |d: f64| -> Result<f64, CliError> { arg.map_or(Ok(d), |s| s.parse().map_err(|_| CliError::Usage(format!("bad parameter `{s}` for {name}")))) };
    Ok(match name {
        "identity" => identity_routing(),
        "empty" => empty_routing(),
        "x_only_routing" => usage(x_only_routing(n))?,
        "x_only_bb84" => usage(x_only_bb84(n))?,
        "constant_bb84" => constant_bb84(num(1.0)?),
        "depolarized" => usage(depolarized_routing(num(0.05)?))?,
        "gardenhose" => usage(build_ip_protocol(n, Wiring::Pruned).and_then(|p| compile_strategy(&p)))?,
        other => return Err(CliError::Usage(format!("unknown strategy `{other}`"))),
    })
}

#[derive(Serialize)]
struct BranchCsv<'a> {
    schema_version: u32,
    input: &'a str,
    branch: &'a str,
    bits: &'a str,
    verdict: String,
    lhs: usize,
    markov_bound: f64,
    ok: bool,
}

pub fn reduce(run: &RunConfig, a: &ReduceArgs) -> Result<(), CliError> {
    let s = match (&a.strategy, &a.builtin) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            usage(Strategy::from_json(&text))?
        }
        (None, Some(b)) => builtin_strategy(b, a.n)?,
        (None, None) => return Err(CliError::Usage("reduce needs --strategy or --builtin".into())),
    };
    let f = function(&a.function, a.n)?;
    let sim = match a.samples {
        Some(k) => SimOptions { branch_limit: run.branch_limit, ..SimOptions::sampled(k, require_seed(run, "sampled reduction")?) },
        None => SimOptions::exhaustive(run.branch_limit),
    };
    let opts = SmpOptions {
        sim,
        eps0: Some(a.eps0.unwrap_or(threshold(run, s.task()))),
        verify_every: a.verify_every,
        record_branches: a.records || run.format == Format::Csv,
        slack: if a.samples.is_some() { a.slack } else { 0.0 },
    };
    let report: SmpReport = smp_simulation(&s, &f, &opts)?;
    match run.format {
        Format::Json => write_json(run.out.as_deref(), &report)?,
        Format::Csv => {
            let rows: Vec<BranchCsv<'_>> = report
                .branch_records
                .iter()
                .map(|b| BranchCsv {
                    schema_version: SCHEMA_VERSION,
                    input: &b.input,
                    branch: &b.branch,
                    bits: &b.bits,
                    verdict: b.verdict.to_string(),
                    lhs: b.lhs,
                    markov_bound: b.markov_bound,
                    ok: b.ok,
                })
                .collect();
            write_csv(run.out.as_deref(), &rows)?
        }
    }
    violation(report.ok, || format!("reduction check failed (lhs_ok = {}, markov_ok = {}, mismatches = {})", report.lhs_ok, report.markov_ok, report.reconstruction_mismatches))
}

#[derive(Serialize)]
struct InvariantReport {
    schema_version: u32,
    seed: u64,
    results: Vec<BatteryResult>,
    ok: bool,
}

#[derive(Serialize)]
struct BatteryCsv<'a> {
    schema_version: u32,
    name: &'a str,
    samples: usize,
    worst_margin: f64,
    tolerance: f64,
    violations: usize,
    passed: bool,
}

pub fn invariants(run: &RunConfig, a: &InvariantArgs) -> Result<(), CliError> {
    let seed = require_seed(run, "invariants")?;
    let counts = BatteryCounts { cit: a.cit, continuity: a.continuity, routing_floor: a.routing_floor, disjointness: a.disjointness, bb84_uncertainty: a.bb84_uncertainty };
    let results = run_batteries(counts, seed)?;
    let ok = results.iter().all(BatteryResult::passed);
    match run.format {
        Format::Json => write_json(run.out.as_deref(), &InvariantReport { schema_version: SCHEMA_VERSION, seed, results: results.clone(), ok })?,
        Format::Csv => {
            let rows: Vec<BatteryCsv<'_>> = results
                .iter()
                .map(|r| BatteryCsv {
                    schema_version: SCHEMA_VERSION,
                    name: &r.name,
                    samples: r.samples,
                    worst_margin: r.worst_margin,
                    tolerance: r.tolerance,
                    violations: r.violations,
                    passed: r.passed(),
                })
                .collect();
            write_csv(run.out.as_deref(), &rows)?
        }
    }
    let failed: Vec<&str> = results.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    violation(ok, || format!("violated: {}", failed.join(", ")))
}

#[derive(Serialize)]
struct BoundsReport {
    schema_version: u32,
    reports: Vec<BoundReport>,
}

#[derive(Serialize)]
struct SweepCsv {
    schema_version: u32,
    n: usize,
    eps: f64,
    cleve: f64,
    nayak: f64,
    nayak_ge_cleve: bool,
}

pub fn bounds(run: &RunConfig, a: &BoundsArgs) -> Result<(), CliError> {
    if a.corpus {
        let seed = require_seed(run, "the corpus audit")?;
        let audit: CorpusAudit = audit_corpus(&default_corpus(a.samples, seed)?)?;
        write_json(run.out.as_deref(), &audit)?;
        return violation(audit.counterexamples == 0, || format!("{} certified strategies violate the bound", audit.counterexamples));
    }
    let function: BoundFunction = usage(a.function.parse())?;
    let eps = if a.eps.is_empty() { eps_grid() } else { a.eps.clone() };
    if let Some(e) = eps.iter().find(|e| !(0.0..=0.5).contains(*e)) {
        return Err(CliError::Usage(format!("ε = {e} outside [0, ½]")));
    }
    if !(0.0..=1.0).contains(&a.delta) {
        return Err(CliError::Usage(format!("δ = {} outside [0, 1]", a.delta)));
    }
    if run.format == Format::Csv {
        let rows: Vec<SweepCsv> = sweep(a.n.iter().copied(), &eps)
            .into_iter()
            .map(|r| SweepCsv { schema_version: SCHEMA_VERSION, n: r.n, eps: r.eps, cleve: r.cleve, nayak: r.nayak, nayak_ge_cleve: r.nayak_ge_cleve })
            .collect();
        return write_csv(run.out.as_deref(), &rows);
    }
    let profile = match (a.q, a.cg, a.cm) {
        (Some(q), Some(c_g), Some(c_m)) => Some(CostProfile { q, c_g, c_m, bits_per_choice: a.bpc }),
        (None, None, None) => None,
        _ => return Err(CliError::Usage("--q, --cg and --cm go together".into())),
    };
    let eps0 = a.eps0.unwrap_or(run.eps0_routing);
    let mut reports = Vec::new();
    for &n in &a.n {
        for &e in &eps {
            reports.push(eps_prime_report(e, a.delta));
            if function == BoundFunction::Ip {
                reports.push(cleve_report(n, e));
                reports.push(nayak_report(n, e));
            }
            if let Some(p) = profile {
                reports.push(main_theorem_audit(p, n, e, a.delta, eps0, function));
            }
        }
        if function == BoundFunction::Disj {
            reports.push(disj_report(n));
        }
        if let Some(d) = a.d {
            reports.push(depth_report(n, d));
        }
    }
    write_json(run.out.as_deref(), &BoundsReport { schema_version: SCHEMA_VERSION, reports: reports.clone() })?;
    let bad = reports.iter().filter(|r| r.satisfied == Some(false)).count();
    violation(bad == 0, || format!("{bad} audits violated"))
}
