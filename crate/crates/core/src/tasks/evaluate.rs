//! Exhaustive and sampled evaluation of strategies against a Boolean function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::function::{input_index, BooleanFunction};
use super::strategy::{Povm, Strategy, TaskKind, REFERENCE};
use crate::circuits::{sample_stages, visit_branches, Branch, Inputs, Outcome, Stage, DEFAULT_BRANCH_LIMIT};
use crate::qcore::entropy::{outcome_distribution, Basis};
use crate::qcore::{FactoredState, PureState};
use crate::{Error, Result, SCHEMA_VERSION};

/// Markov threshold for BB84 referees.
pub const EPS0_BB84: f64 = 0.11;
/// Markov threshold for routing referees, √3/4.
pub const EPS0_ROUTING: f64 = 0.433_012_701_892_219_3;

pub fn default_threshold(task: TaskKind) -> f64 {
    match task {
        TaskKind::Routing => EPS0_ROUTING,
        TaskKind::Bb84 => EPS0_BB84,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SimMode {
    Exhaustive,
    /// Monte-Carlo over measurement branches.
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    pub branch_limit: usize,
    pub mode: SimMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { branch_limit: DEFAULT_BRANCH_LIMIT, mode: SimMode::Exhaustive }
    }
}

impl SimOptions {
    pub fn exhaustive(branch_limit: usize) -> Self {
        Self { branch_limit, mode: SimMode::Exhaustive }
    }

    pub fn sampled(samples: usize, seed: u64) -> Self {
        Self { branch_limit: DEFAULT_BRANCH_LIMIT, mode: SimMode::Sampled { samples, seed } }
    }
}

pub(crate) mod bitstr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bits: &[bool], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::tasks::function::bit_string(bits))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<bool>, D::Error> {
        let s = String::deserialize(d)?;
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(serde::de::Error::custom(format!("invalid bit string `{s}`"))),
            })
            .collect()
    }
}

/// Evaluation of one input pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputResult {
    #[serde(with = "bitstr")]
    pub x: Vec<bool>,
    #[serde(with = "bitstr")]
    pub y: Vec<bool>,
    pub f: bool,
    /// Purified distance (routing) or `1 − success` (BB84).
    pub epsilon: f64,
    /// Probability that `b = b' = b''` (BB84) or `F²` with `Φ⁺` (routing).
    pub success_prob: f64,
    /// Branches enumerated, or samples drawn.
    pub branches: usize,
    /// Largest first-round gate count over execution paths.
    pub c_g: usize,
    /// Largest first-round measurement count over execution paths.
    pub c_m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessReport {
    pub schema_version: u32,
    pub strategy: String,
    pub task: TaskKind,
    pub function: String,
    pub n: usize,
    pub threshold: f64,
    pub rows: Vec<InputResult>,
    pub worst_epsilon: f64,
    /// Fraction of inputs with `ε(x, y) ≤ threshold`, i.e. `1 − δ`.
    pub delta_fraction: f64,
}

/// The `(ε, δ)` at which a report certifies a strategy: `ε` is the worst error
/// among inputs below the threshold and `δ` the fraction of the rest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub epsilon: f64,
    pub delta: f64,
}

impl CorrectnessReport {
    pub fn new(strategy: &str, task: TaskKind, f: &BooleanFunction, threshold: f64, rows: Vec<InputResult>) -> Self {
        let worst = rows.iter().map(|r| r.epsilon).fold(0.0, f64::max);
        let good = rows.iter().filter(|r| r.epsilon <= threshold).count();
        let frac = if rows.is_empty() { 0.0 } else { good as f64 / rows.len() as f64 };
        Self {
            schema_version: SCHEMA_VERSION,
            strategy: strategy.to_string(),
            task,
            function: f.name(),
            n: f.n(),
            threshold,
            rows,
            worst_epsilon: worst,
            delta_fraction: frac,
        }
    }

    pub fn delta(&self) -> f64 {
        1.0 - self.delta_fraction
    }

    /// `None` when no input is strictly below the threshold.
    pub fn certify(&self) -> Option<Certificate> {
        let good: Vec<f64> = self.rows.iter().map(|r| r.epsilon).filter(|&e| e < self.threshold).collect();
        if good.is_empty() {
            return None;
        }
        let delta = 1.0 - good.len() as f64 / self.rows.len() as f64;
        Some(Certificate { epsilon: good.iter().copied().fold(0.0, f64::max), delta })
    }

    /// Largest first-round `(C_G, C_M)` over all inputs.
    pub fn max_costs(&self) -> (usize, usize) {
        self.rows.iter().fold((0, 0), |(g, m), r| (g.max(r.c_g), m.max(r.c_m)))
    }
}

pub(crate) fn sample_seed(seed: u64, x: &[bool], y: &[bool]) -> u64 {
    seed ^ (input_index(x, y) as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Initial state with round-2 ancillas appended.
pub(crate) fn full_initial_state(s: &Strategy) -> Result<FactoredState> {
    let mut st = s.initial_state()?;
    for a in s.round2_ancillas() {
        st.push(PureState::zeros(&[a.as_str()])?)?;
    }
    Ok(st)
}

/// Mean of `score` over the branches of `stages`, exact or sampled; also
/// returns the number of branches visited.
fn average<F>(stages: &[Stage<'_>], init: FactoredState, inputs: Inputs<'_>, opts: &SimOptions, seed_key: (&[bool], &[bool]), score: F) -> Result<(f64, usize)>
where
    F: Fn(&Branch, &FactoredState) -> Result<f64>,
{
    match opts.mode {
        SimMode::Exhaustive => {
            let mut total = 0.0;
            let n = visit_branches(stages, Outcome::root(init), inputs, opts.branch_limit, |b, s| {
                total += b.probability * score(b, &s)?;
                Ok(())
            })?;
            Ok((total, n))
        }
        SimMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("sampled mode needs at least one sample".into()));
            }
            let mut rng = crate::qcore::random::seeded_rng(sample_seed(seed, seed_key.0, seed_key.1));
            let mut total = 0.0;
            for _ in 0..samples {
                let o = sample_stages(stages, Outcome::root(init.clone()), inputs, &mut rng)?;
                total += score(&o.branch, &o.state)?;
            }
            Ok((total / samples as f64, samples))
        }
    }
}

/// `⟨Φ⁺| ρ_{R,out} |Φ⁺⟩` for one branch.
pub fn recovery_overlap(state: &FactoredState, output: &str) -> Result<f64> {
    let rho = state.reduced(&[REFERENCE.to_string(), output.to_string()])?;
    Ok(rho.overlap_with_pure(&PureState::phi_plus(REFERENCE, output)?)?.clamp(0.0, 1.0))
}

pub(crate) fn first_round_costs(s: &Strategy, x: &[bool], y: &[bool], n: usize) -> Result<(usize, usize)> {
    use crate::circuits::Visibility;
    let a = s.alice_circuit(x)?.validate(&Visibility { x_len: Some(n), ..Default::default() })?;
    let b = s.bob_circuit(y)?.validate(&Visibility { y_len: Some(n), ..Default::default() })?;
    Ok((a.max_gates + b.max_gates, a.max_measurements + b.max_measurements))
}

enum Score<'a> {
    Routing { output: &'a str },
    Bb84 { pm: &'a Povm, pmp: &'a Povm, basis: Basis },
}

/// Round-2 stages for one input and the per-branch score they feed.
pub(crate) struct Round2Plan<'a> {
    pub stages: Vec<Stage<'a>>,
    score: Score<'a>,
}

impl<'a> Round2Plan<'a> {
    pub fn new(s: &'a Strategy, fx: bool, x: &[bool], y: &[bool]) -> Result<Self> {
        match s.task() {
            TaskKind::Routing => {
                let d = s.decoder(fx, x, y)?;
                Ok(Self { stages: vec![Stage { circuit: &d.circuit, wires: &d.wires }], score: Score::Routing { output: &d.output } })
            }
            TaskKind::Bb84 => {
                let (pm, pmp) = s.povms(x, y)?;
                let stages = [pm, pmp]
                    .into_iter()
                    .filter_map(|p| match p {
                        Povm::Measure { circuit, wires, .. } => Some(Stage { circuit, wires }),
                        Povm::Constant { .. } => None,
                    })
                    .collect();
                Ok(Self { stages, score: Score::Bb84 { pm, pmp, basis: Basis::from_bit(fx) } })
            }
        }
    }

    /// `F²` with `Φ⁺` (routing) or the probability that both guesses match
    /// the reference (BB84) on a fully executed branch.
    pub fn score(&self, b: &Branch, st: &FactoredState) -> Result<f64> {
        match &self.score {
            Score::Routing { output } => recovery_overlap(st, output),
            Score::Bb84 { pm, pmp, basis } => {
                let guess = |p: &Povm| -> Result<[f64; 2]> {
                    Ok(match p {
                        Povm::Constant { p0 } => [*p0, 1.0 - p0],
                        Povm::Measure { bit, .. } => {
                            let g = *b.bits.get(bit).ok_or_else(|| Error::InvalidStrategy(format!("POVM bit `{bit}` unset")))?;
                            if g {
                                [0.0, 1.0]
                            } else {
                                [1.0, 0.0]
                            }
                        }
                    })
                };
                let (gm, gmp) = (guess(pm)?, guess(pmp)?);
                let r = st.reduced(&[REFERENCE.to_string()])?;
                let pr = outcome_distribution(&r, REFERENCE, *basis)?;
                Ok((0..2).map(|b| gm[b] * gmp[b] * pr[b]).sum())
            }
        }
    }
}

/// `ε` from a success value: `√(1 − F²)` for routing, `1 − p` for BB84.
pub(crate) fn error_from_success(task: TaskKind, success: f64) -> f64 {
    let success = success.clamp(0.0, 1.0);
    match task {
        TaskKind::Routing => (1.0 - success).max(0.0).sqrt(),
        TaskKind::Bb84 => 1.0 - success,
    }
}

/// Evaluates one input without re-validating the strategy.
fn evaluate_input_unchecked(s: &Strategy, f: &BooleanFunction, x: &[bool], y: &[bool], opts: &SimOptions) -> Result<InputResult> {
    let fx = f.eval(x, y)?;
    let inputs = Inputs { x, y };
    let plan = Round2Plan::new(s, fx, x, y)?;
    let mut stages = vec![
        Stage { circuit: s.alice_circuit(x)?, wires: &s.alice_wires },
        Stage { circuit: s.bob_circuit(y)?, wires: &s.bob_wires },
    ];
    stages.extend(plan.stages.iter().copied());
    let init = full_initial_state(s)?;
    let (success, branches) = average(&stages, init, inputs, opts, (x, y), |b, st| plan.score(b, st))?;
    let success = success.clamp(0.0, 1.0);
    let epsilon = error_from_success(s.task(), success);
    let (c_g, c_m) = first_round_costs(s, x, y, f.n())?;
    Ok(InputResult { x: x.to_vec(), y: y.to_vec(), f: fx, epsilon, success_prob: success, branches, c_g, c_m })
}

pub fn evaluate_input(s: &Strategy, f: &BooleanFunction, x: &[bool], y: &[bool], opts: &SimOptions) -> Result<InputResult> {
    s.validate(f.n())?;
    evaluate_input_unchecked(s, f, x, y, opts)
}

/// Purified distance between the recovered state and `Φ⁺_RQ` on input `(x, y)`,
/// averaged over first-round outcomes as seen by a decoder that may read them.
pub fn run_frouting(s: &Strategy, f: &BooleanFunction, x: &[bool], y: &[bool], opts: &SimOptions) -> Result<f64> {
    if s.task() != TaskKind::Routing {
        return Err(Error::InvalidStrategy(format!("`{}` is not a routing strategy", s.name)));
    }
    Ok(evaluate_input(s, f, x, y, opts)?.epsilon)
}

/// Probability that the referee's outcome and both guesses agree.
pub fn run_fbb84(s: &Strategy, f: &BooleanFunction, x: &[bool], y: &[bool], opts: &SimOptions) -> Result<f64> {
    if s.task() != TaskKind::Bb84 {
        return Err(Error::InvalidStrategy(format!("`{}` is not a BB84 strategy", s.name)));
    }
    Ok(evaluate_input(s, f, x, y, opts)?.success_prob)
}

/// Runs every input in parallel; rows are sorted by `(x, y)`.
pub fn evaluate_strategy(s: &Strategy, f: &BooleanFunction, threshold: f64, opts: &SimOptions) -> Result<CorrectnessReport> {
    s.validate(f.n())?;
    let inputs: Vec<_> = f.inputs().collect();
    let rows = inputs.par_iter().map(|(x, y)| evaluate_input_unchecked(s, f, x, y, opts)).collect::<Result<Vec<_>>>()?;
    Ok(CorrectnessReport::new(&s.name, s.task(), f, threshold, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{Circuit, GateSet, Predicate};
    use crate::tasks::function::Builtin;
    use crate::tasks::library::{depolarized_routing, x_only_routing};
    use crate::tasks::strategy::{Decoder, Keyed, Partition, Round2, Strategy};
    use proptest::prelude::*;

    fn random_strategy(ops: &[(u8, u8, u8)], measured: &[bool; 2], feed: bool) -> Strategy {
        let mut s = x_only_routing(1).unwrap();
        s.alice_wires = vec!["Q".into(), "S".into(), "T".into()];
        let mut c = Circuit::new(3, GateSet::canonical());
        for &(g, a, b) in ops {
            let (a, b) = (a as usize % 3, b as usize % 3);
            match g % 4 {
                3 if a != b => {
                    c.gate("CNOT", &[a, b]).unwrap();
                }
                3 => {}
                k => {
                    c.gate(["T", "X", "Z"][k as usize], &[a]).unwrap();
                }
            }
        }
        // S and T may be measured; Q never is, so a fed-forward X on Q is legal.
        for (i, &m) in measured.iter().enumerate() {
            if m {
                c.measure(i + 1, &format!("a{i}"));
            }
        }
        if feed && measured[0] {
            let x = c.gate_instruction("X", &[0]).unwrap();
            c.conditional(Predicate::Bit { name: "a0".into() }, vec![x], vec![]);
        }
        s.alice_round1 = Keyed::uniform(c);
        s.partition = Partition { m0: vec!["Q".into(), "S".into()], m0p: vec!["T".into()], ..Default::default() };
        s.round2 = Round2::Routing { decoder0: Some(Keyed::uniform(Decoder::identity("Q"))), decoder1: Some(Keyed::uniform(Decoder::identity("T"))) };
        s
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn epsilon_in_unit_interval(ops in proptest::collection::vec((0u8..4, 0u8..3, 0u8..3), 0..8),
                                    m0 in any::<bool>(), m1 in any::<bool>(), feed in any::<bool>(),
                                    table in proptest::collection::vec(any::<bool>(), 4)) {
            let s = random_strategy(&ops, &[m0, m1], feed);
            let f = BooleanFunction::from_table(1, table).unwrap();
            let r = evaluate_strategy(&s, &f, EPS0_ROUTING, &SimOptions::default()).unwrap();
            for row in &r.rows {
                prop_assert!((0.0..=1.0).contains(&row.epsilon));
                prop_assert!((0.0..=1.0).contains(&row.success_prob));
                if !m0 && !m1 {
                    prop_assert_eq!(row.branches, 1);
                }
            }
            prop_assert!((0.0..=1.0).contains(&r.delta_fraction));
        }
    }

    #[test]
    fn sampled_mode_tracks_exhaustive() {
        let s = depolarized_routing(0.3).unwrap();
        let f = BooleanFunction::builtin(Builtin::Const0, 1).unwrap();
        let exact = evaluate_input(&s, &f, &[false], &[false], &SimOptions::default()).unwrap();
        let est = evaluate_input(&s, &f, &[false], &[false], &SimOptions::sampled(20_000, 5)).unwrap();
        // F² per branch is 1 or 1/4, so the estimator's sd is below 0.005
        assert!((exact.success_prob - est.success_prob).abs() < 0.02);
        assert_eq!(est.branches, 20_000);
    }

    #[test]
    fn certificate_and_report_shape() {
        let s = depolarized_routing(0.05).unwrap();
        let f = BooleanFunction::builtin(Builtin::Const0, 2).unwrap();
        let r = evaluate_strategy(&s, &f, EPS0_ROUTING, &SimOptions::default()).unwrap();
        assert_eq!(r.rows.len(), 16);
        assert_eq!(r.max_costs(), (3, 1));
        let cert = r.certify().unwrap();
        assert!((cert.epsilon - 0.0375f64.sqrt()).abs() < 1e-9);
        assert_eq!(cert.delta, 0.0);
        let json = serde_json::to_string(&r.rows[5]).unwrap();
        assert!(json.contains(r#""x":"01","y":"01""#), "{json}");
    }
}
