//! The reduction run end to end: every first-round branch is encoded into two
//! messages, the referee classifies the state those messages describe, and
//! the failure rate is compared with the Markov bound `ε(x, y)/ε₀`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::{encode_transcript, shifted, EncodedMessage, Widths};
use super::reconstruct::{check_replayable, reconstruct_state, smp_register_size};
use super::referee::{Verdict, VerdictCache};
use crate::circuits::{ceil_log2, sample_stages, visit_branches, Branch, Inputs, Outcome, Stage};
use crate::qcore::{FactoredState, PureState};
use crate::tasks::evaluate::{bitstr, error_from_success, first_round_costs, sample_seed, Round2Plan};
use crate::tasks::{default_threshold, BooleanFunction, SimMode, SimOptions, Strategy, TaskKind};
use crate::{Error, Result, SCHEMA_VERSION};

/// Exhaustive runs accept failures this far above the Markov bound.
pub const EXACT_TOL: f64 = 1e-9;
/// Reconstructed and simulated states must agree this closely.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmpOptions {
    pub sim: SimOptions,
    /// Referee threshold; the task default when absent.
    pub eps0: Option<f64>,
    /// Decode and replay every k-th branch against the simulator; 0 disables.
    pub verify_every: usize,
    /// Keep one record per branch in the report.
    pub record_branches: bool,
    /// Allowance added to the Markov bound in sampled mode.
    pub slack: f64,
}

impl Default for SmpOptions {
    fn default() -> Self {
        Self { sim: SimOptions::default(), eps0: None, verify_every: 1, record_branches: false, slack: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRecord {
    /// `x|y`.
    pub input: String,
    /// First-round outcomes, Alice's then Bob's, separated by `|`.
    pub branch: String,
    pub probability: f64,
    /// Alice's message, then Bob's, separated by `|`.
    pub bits: String,
    pub verdict: Verdict,
    pub correct: bool,
    /// Strategy error on this branch: `√(1 − F_m²)` or `1 − p_m`.
    pub branch_error: f64,
    pub lhs: usize,
    pub markov_bound: f64,
    /// Both messages fit the bound and, when checked, the referee's state matches.
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmpRow {
    #[serde(with = "bitstr")]
    pub x: Vec<bool>,
    #[serde(with = "bitstr")]
    pub y: Vec<bool>,
    pub f: bool,
    /// Strategy error on this input.
    pub epsilon: f64,
    /// Mean of the per-branch error; at most `epsilon`.
    pub mean_branch_error: f64,
    /// Probability that the referee's verdict differs from `f(x, y)`.
    pub failure: f64,
    pub abstain: f64,
    pub branches: usize,
    pub max_message_bits: usize,
    pub markov_bound: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmpReport {
    pub schema_version: u32,
    pub strategy: String,
    pub task: TaskKind,
    pub function: String,
    pub n: usize,
    pub mode: SimMode,
    /// Register size the messages address.
    pub q: usize,
    pub eps0: f64,
    pub c_g: usize,
    pub c_m: usize,
    pub bits_per_choice: usize,
    /// `(2⌈log₂ q⌉ + bits_per_choice)·C_G + (⌈log₂ q⌉ + 1)·C_M`.
    pub lhs: usize,
    pub max_message_bits: usize,
    pub lhs_ok: bool,
    pub reconstructions_checked: usize,
    pub reconstruction_mismatches: usize,
    pub rows: Vec<SmpRow>,
    pub markov_ok: bool,
    /// Largest referee failure over inputs.
    pub referee_epsilon: f64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branch_records: Vec<BranchRecord>,
}

struct Accum {
    weight: f64,
    success: f64,
    branch_error: f64,
    failure: f64,
    abstain: f64,
    branches: usize,
    max_bits: usize,
    checked: usize,
    mismatches: usize,
    records: Vec<BranchRecord>,
}

struct Context<'a> {
    s: &'a Strategy,
    x: &'a [bool],
    y: &'a [bool],
    fx: bool,
    q: usize,
    lhs: usize,
    opts: &'a SmpOptions,
    plan: Round2Plan<'a>,
    ancillas: Vec<String>,
}

impl Context<'_> {
    /// Success of the second round conditioned on the first-round branch.
    fn branch_success(&self, b: &Branch, st: &FactoredState) -> Result<f64> {
        let mut st = st.clone();
        for a in &self.ancillas {
            st.push(PureState::zeros(&[a.as_str()])?)?;
        }
        let mut total = 0.0;
        let root = Outcome { branch: b.clone(), state: st };
        visit_branches(&self.plan.stages, root, Inputs { x: self.x, y: self.y }, self.opts.sim.branch_limit, |b2, s2| {
            total += b2.probability * self.plan.score(b2, &s2)?;
            Ok(())
        })?;
        Ok(total / b.probability)
    }

    fn messages(&self, b: &Branch) -> Result<(EncodedMessage, EncodedMessage)> {
        let ga = &self.s.alice_circuit(self.x)?.gateset;
        let gb = &self.s.bob_circuit(self.y)?.gateset;
        let a = encode_transcript(&b.transcripts[0], self.q, ga)?;
        let m = encode_transcript(&shifted(&b.transcripts[1], self.s.alice_wires.len()), self.q, gb)?;
        Ok((a, m))
    }

    fn leaf(&self, acc: &mut Accum, cache: &mut VerdictCache, b: &Branch, st: &FactoredState, weight: f64) -> Result<()> {
        let success = self.branch_success(b, st)?;
        let err = error_from_success(self.s.task(), success);
        let (ma, mb) = self.messages(b)?;
        let bits = ma.len().max(mb.len());
        let verdict = cache.classify(st)?.side;
        let mut matched = true;
        if self.opts.verify_every > 0 && acc.branches % self.opts.verify_every == 0 {
            acc.checked += 1;
            let r = reconstruct_state(self.s, &ma, &mb, self.x, self.y)?;
            matched = r.state.approx_eq(st, RECONSTRUCTION_TOL)?
                && (r.probability - b.probability).abs() <= RECONSTRUCTION_TOL
                && r.alice == b.transcripts[0]
                && r.bob == b.transcripts[1];
            if !matched {
                acc.mismatches += 1;
            }
        }
        acc.branches += 1;
        acc.weight += weight;
        acc.success += weight * success;
        acc.branch_error += weight * err;
        if !verdict.is_correct(self.fx) {
            acc.failure += weight;
        }
        if verdict == Verdict::Abstain {
            acc.abstain += weight;
        }
        acc.max_bits = acc.max_bits.max(bits);
        if self.opts.record_branches {
            acc.records.push(BranchRecord {
                input: format!("{}|{}", crate::tasks::bit_string(self.x), crate::tasks::bit_string(self.y)),
                branch: b.outcome_string(),
                probability: b.probability,
                bits: format!("{}|{}", ma.bit_string(), mb.bit_string()),
                verdict,
                correct: verdict.is_correct(self.fx),
                branch_error: err,
                lhs: self.lhs,
                // filled in once the input's ε is known
                markov_bound: f64::NAN,
                ok: bits <= self.lhs && matched,
            });
        }
        Ok(())
    }
}

fn run_input(s: &Strategy, f: &BooleanFunction, x: &[bool], y: &[bool], q: usize, lhs: usize, eps0: f64, opts: &SmpOptions) -> Result<(SmpRow, Accum)> {
    let fx = f.eval(x, y)?;
    let ctx = Context { s, x, y, fx, q, lhs, opts, plan: Round2Plan::new(s, fx, x, y)?, ancillas: s.round2_ancillas().into_iter().collect() };
    let stages = [Stage { circuit: s.alice_circuit(x)?, wires: &s.alice_wires }, Stage { circuit: s.bob_circuit(y)?, wires: &s.bob_wires }];
    let inputs = Inputs { x, y };
    let mut cache = VerdictCache::new(s.task(), s.partition.clone(), eps0);
    let mut acc = Accum { weight: 0.0, success: 0.0, branch_error: 0.0, failure: 0.0, abstain: 0.0, branches: 0, max_bits: 0, checked: 0, mismatches: 0, records: Vec::new() };
    let init = s.initial_state()?;
    match opts.sim.mode {
        SimMode::Exhaustive => {
            visit_branches(&stages, Outcome::root(init), inputs, opts.sim.branch_limit, |b, st| ctx.leaf(&mut acc, &mut cache, b, &st, b.probability))?;
        }
        SimMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("sampled mode needs at least one sample".into()));
            }
            let mut rng = crate::qcore::random::seeded_rng(sample_seed(seed, x, y));
            let w = 1.0 / samples as f64;
            for _ in 0..samples {
                let o = sample_stages(&stages, Outcome::root(init.clone()), inputs, &mut rng)?;
                ctx.leaf(&mut acc, &mut cache, &o.branch, &o.state, w)?;
            }
        }
    }
    let epsilon = error_from_success(s.task(), acc.success);
    let markov_bound = epsilon / eps0;
    let tol = match opts.sim.mode {
        SimMode::Exhaustive => EXACT_TOL,
        SimMode::Sampled { .. } => opts.slack.max(EXACT_TOL),
    };
    for r in &mut acc.records {
        r.markov_bound = markov_bound;
    }
    let row = SmpRow {
        x: x.to_vec(),
        y: y.to_vec(),
        f: fx,
        epsilon,
        mean_branch_error: acc.branch_error,
        failure: acc.failure,
        abstain: acc.abstain,
        branches: acc.branches,
        max_message_bits: acc.max_bits,
        markov_bound,
        ok: acc.failure <= markov_bound + tol,
    };
    Ok((row, acc))
}

/// Runs the reduction on every input of `f`, in parallel; rows are sorted by `(x, y)`.
pub fn smp_simulation(s: &Strategy, f: &BooleanFunction, opts: &SmpOptions) -> Result<SmpReport> {
    s.validate(f.n())?;
    check_replayable(s)?;
    let eps0 = opts.eps0.unwrap_or_else(|| default_threshold(s.task()));
    let q = smp_register_size(s);
    let inputs: Vec<_> = f.inputs().collect();
    let (mut c_g, mut c_m, mut bpc) = (0, 0, 0);
    for (x, y) in &inputs {
        let (g, m) = first_round_costs(s, x, y, f.n())?;
        c_g = c_g.max(g);
        c_m = c_m.max(m);
        bpc = bpc.max(s.alice_circuit(x)?.gateset.bits_per_choice()).max(s.bob_circuit(y)?.gateset.bits_per_choice());
    }
    let lhs = Widths { choice: bpc, location: ceil_log2(q) }.message_len(c_g, c_m);
    let results = inputs.par_iter().map(|(x, y)| run_input(s, f, x, y, q, lhs, eps0, opts)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(results.len());
    let (mut checked, mut mismatches, mut max_bits) = (0, 0, 0);
    let mut records = Vec::new();
    for (row, acc) in results {
        checked += acc.checked;
        mismatches += acc.mismatches;
        max_bits = max_bits.max(acc.max_bits);
        records.extend(acc.records);
        rows.push(row);
    }
    let markov_ok = rows.iter().all(|r| r.ok);
    let lhs_ok = lhs >= max_bits;
    Ok(SmpReport {
        schema_version: SCHEMA_VERSION,
        strategy: s.name.clone(),
        task: s.task(),
        function: f.name(),
        n: f.n(),
        mode: opts.sim.mode,
        q,
        eps0,
        c_g,
        c_m,
        bits_per_choice: bpc,
        lhs,
        max_message_bits: max_bits,
        lhs_ok,
        reconstructions_checked: checked,
        reconstruction_mismatches: mismatches,
        referee_epsilon: rows.iter().map(|r| r.failure).fold(0.0, f64::max),
        ok: markov_ok && lhs_ok && mismatches == 0,
        markov_ok,
        rows,
        branch_records: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::library::{depolarized_routing, identity_routing, x_only_bb84, x_only_routing};
    use crate::tasks::{evaluate_strategy, Builtin, EPS0_ROUTING};

    #[test]
    fn x_only_strategies_are_always_classified_correctly() {
        for n in 1..=2 {
            let f = BooleanFunction::builtin(Builtin::XOnly, n).unwrap();
            for s in [x_only_routing(n).unwrap(), x_only_bb84(n).unwrap()] {
                let r = smp_simulation(&s, &f, &SmpOptions::default()).unwrap();
                assert!(r.ok, "{}", s.name);
                assert_eq!(r.referee_epsilon, 0.0, "{}", s.name);
                assert!(r.rows.iter().all(|row| row.abstain == 0.0));
                assert_eq!(r.reconstruction_mismatches, 0);
                assert!(r.reconstructions_checked > 0);
            }
        }
    }

    #[test]
    fn canonical_lhs_matches_closed_form() {
        let f = BooleanFunction::builtin(Builtin::XOnly, 1).unwrap();
        let r = smp_simulation(&x_only_routing(1).unwrap(), &f, &SmpOptions::default()).unwrap();
        // q = 2, conditional swap of three CNOTs, no measurements
        assert_eq!((r.q, r.c_g, r.c_m), (2, 3, 0));
        assert_eq!(r.lhs, (1 + 1) * (2 * 3));
        assert_eq!(r.max_message_bits, r.lhs);
    }

    #[test]
    fn depolarized_failure_respects_markov() {
        let f = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
        let p = 0.05;
        let s = depolarized_routing(p).unwrap();
        let opts = SmpOptions { record_branches: true, ..Default::default() };
        let r = smp_simulation(&s, &f, &opts).unwrap();
        let expect_eps = (0.75 * p).sqrt();
        for row in &r.rows {
            assert!((row.epsilon - expect_eps).abs() < 1e-9);
            // J goes to side 1 on the noisy branch
            assert!((row.failure - p).abs() < 1e-9);
            assert!(row.failure <= row.markov_bound);
            assert!(row.mean_branch_error <= row.epsilon + 1e-12);
        }
        assert!(r.ok);
        assert_eq!(r.branch_records.len(), 2 * r.rows.len());
        let json = serde_json::to_string(&r.branch_records[0]).unwrap();
        for key in ["\"input\"", "\"branch\"", "\"bits\"", "\"verdict\"", "\"lhs\"", "\"markov_bound\"", "\"ok\""] {
            assert!(json.contains(key), "{json}");
        }

        let sampled = SmpOptions { sim: SimOptions::sampled(10_000, 9), slack: 0.05, ..Default::default() };
        let r = smp_simulation(&s, &f, &sampled).unwrap();
        for row in &r.rows {
            assert!(row.failure <= row.epsilon / EPS0_ROUTING + 0.05);
        }
    }

    #[test]
    fn strategy_error_agrees_with_evaluator() {
        let f = BooleanFunction::ip(1).unwrap();
        let s = identity_routing();
        let f0 = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
        let direct = evaluate_strategy(&s, &f0, EPS0_ROUTING, &SimOptions::default()).unwrap();
        let r = smp_simulation(&s, &f0, &SmpOptions::default()).unwrap();
        for (a, b) in direct.rows.iter().zip(&r.rows) {
            assert!((a.epsilon - b.epsilon).abs() < 1e-12);
        }
        assert!(matches!(smp_simulation(&s, &f, &SmpOptions::default()), Err(Error::MissingDecoder(1))));
    }
}
