//! Referee-side classification of a reconstructed state `ρ_{RMM'}` into side
//! 0, side 1 or abstain.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::hmin::{compressed_marginal, hmin, hmin_pure, SUPPORT_LABEL};
use crate::qcore::entropy::{measure_in_basis, Basis};
use crate::qcore::{helstrom_guess_prob, DensityOperator, FactoredState, PureState};
use crate::tasks::{Partition, TaskKind, REFERENCE};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "abstain")]
    Abstain,
}

impl Verdict {
    pub fn side(self) -> Option<bool> {
        match self {
            Verdict::Zero => Some(false),
            Verdict::One => Some(true),
            Verdict::Abstain => None,
        }
    }

    /// Abstaining never counts as correct.
    pub fn is_correct(self, f: bool) -> bool {
        self.side() == Some(f)
    }

    fn from_membership(zero: bool, one: bool) -> Self {
        match (zero, one) {
            (true, false) => Verdict::Zero,
            (false, true) => Verdict::One,
            _ => Verdict::Abstain,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Zero => "0",
            Verdict::One => "1",
            Verdict::Abstain => "abstain",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefereeVerdict {
    pub task: TaskKind,
    pub side: Verdict,
    /// Routing: best purified distance to `Φ⁺` from `M` and from `M'`.
    /// BB84: the smaller of the two sides' guessing probabilities, per basis
    /// (computational, Hadamard).
    pub witness: [f64; 2],
    /// BB84 only: `guess[basis][side]`.
    pub guess: Option<[[f64; 2]; 2]>,
    pub threshold: f64,
}

impl RefereeVerdict {
    /// Whether both sides clear the threshold at once.
    pub fn both_clear(&self) -> bool {
        match self.task {
            TaskKind::Routing => self.witness.iter().all(|&p| p <= self.threshold),
            TaskKind::Bb84 => self.witness.iter().all(|&g| g >= 1.0 - self.threshold),
        }
    }
}

fn routing_verdict(p: [f64; 2], eps0: f64) -> RefereeVerdict {
    RefereeVerdict {
        task: TaskKind::Routing,
        side: Verdict::from_membership(p[0] <= eps0 && p[1] > eps0, p[1] <= eps0 && p[0] > eps0),
        witness: p,
        guess: None,
        threshold: eps0,
    }
}

fn bb84_verdict(guess: [[f64; 2]; 2], eps0: f64) -> RefereeVerdict {
    let witness = [guess[0][0].min(guess[0][1]), guess[1][0].min(guess[1][1])];
    let member = |b: usize| witness[b] >= 1.0 - eps0;
    RefereeVerdict { task: TaskKind::Bb84, side: Verdict::from_membership(member(0), member(1)), witness, guess: Some(guess), threshold: eps0 }
}

/// Routing referee: `P_s = √(1 − F_s²)` with `F_s` the best decoder fidelity
/// from side `s`, computed by the min-entropy program.
pub fn classify_routing<S: AsRef<str>>(rho: &DensityOperator, m: &[S], mp: &[S], eps0: f64) -> Result<RefereeVerdict> {
    let p0 = hmin(rho, REFERENCE, m)?.purified_distance();
    let p1 = hmin(rho, REFERENCE, mp)?.purified_distance();
    Ok(routing_verdict([p0, p1], eps0))
}

/// Helstrom probability of guessing `R`'s outcome in `basis` from `side`
/// of `rho` (which must hold `R` and `side`).
fn guess_from(rho: &DensityOperator, side: &[String], basis: Basis) -> Result<f64> {
    let outs = measure_in_basis(rho, REFERENCE, basis)?;
    match outs.as_slice() {
        [only] => Ok(only.probability.min(1.0)),
        [a, b] => {
            if side.is_empty() {
                return Ok(a.probability.max(b.probability));
            }
            let ra = a.post_state.partial_trace(side)?;
            let rb = b.post_state.partial_trace(side)?;
            let norm = a.probability + b.probability;
            helstrom_guess_prob(a.probability / norm, &ra, b.probability / norm, &rb)
        }
        _ => Err(Error::InvalidState("reference qubit has no outcome".into())),
    }
}

/// BB84 referee: the state lies in `S_β` when both `M` and `M'` guess `R`'s
/// `β`-basis outcome with probability at least `1 − ε₀`.
pub fn classify_bb84<S: AsRef<str>>(rho: &DensityOperator, m: &[S], mp: &[S], eps0: f64) -> Result<RefereeVerdict> {
    let mut guess = [[0.0; 2]; 2];
    for (si, side) in [m, mp].into_iter().enumerate() {
        let side: Vec<String> = side.iter().map(|s| s.as_ref().to_string()).collect();
        let mut keep = vec![REFERENCE.to_string()];
        keep.extend(side.iter().cloned());
        let part = rho.partial_trace(&keep)?;
        for (bi, basis) in [Basis::Computational, Basis::Hadamard].into_iter().enumerate() {
            guess[bi][si] = guess_from(&part, &side, basis)?;
        }
    }
    Ok(bb84_verdict(guess, eps0))
}

fn sides(p: &Partition) -> [Vec<String>; 2] {
    [p.m(), p.mp()]
}

/// Classifies a product state using only the factor that holds `R`; the
/// other factors are uncorrelated with `R` and cannot change either witness.
pub fn classify_factored(task: TaskKind, state: &FactoredState, partition: &Partition, eps0: f64) -> Result<RefereeVerdict> {
    classify_factor(task, state.factor_of(REFERENCE)?, partition, eps0)
}

fn classify_factor(task: TaskKind, psi: &PureState, partition: &Partition, eps0: f64) -> Result<RefereeVerdict> {
    let [m, mp] = sides(partition);
    match task {
        TaskKind::Routing => {
            let p0 = hmin_pure(psi, REFERENCE, &m)?.purified_distance();
            let p1 = hmin_pure(psi, REFERENCE, &mp)?.purified_distance();
            Ok(routing_verdict([p0, p1], eps0))
        }
        TaskKind::Bb84 => {
            let mut guess = [[0.0; 2]; 2];
            for (si, side) in [m, mp].iter().enumerate() {
                let rho = compressed_marginal(psi, REFERENCE, side)?;
                for (bi, basis) in [Basis::Computational, Basis::Hadamard].into_iter().enumerate() {
                    guess[bi][si] = guess_from(&rho, &[SUPPORT_LABEL.to_string()], basis)?;
                }
            }
            Ok(bb84_verdict(guess, eps0))
        }
    }
}

/// Memoizes verdicts by the (phase-normalized, quantized) factor holding `R`.
#[derive(Debug)]
pub struct VerdictCache {
    task: TaskKind,
    partition: Partition,
    eps0: f64,
    entries: HashMap<(Vec<String>, Vec<i64>), RefereeVerdict>,
    pub hits: usize,
    pub misses: usize,
}

const KEY_SCALE: f64 = 1e10;

impl VerdictCache {
    pub fn new(task: TaskKind, partition: Partition, eps0: f64) -> Self {
        Self { task, partition, eps0, entries: HashMap::new(), hits: 0, misses: 0 }
    }

    fn key(psi: &PureState) -> (Vec<String>, Vec<i64>) {
        let amps = psi.amplitudes();
        let lead = amps.iter().copied().fold(num_complex::Complex64::new(0.0, 0.0), |best, a| if a.norm() > best.norm() + 1e-9 { a } else { best });
        let phase = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { num_complex::Complex64::new(1.0, 0.0) };
        let q = amps.iter().flat_map(|a| {
            let z = a * phase;
            [(z.re * KEY_SCALE).round() as i64, (z.im * KEY_SCALE).round() as i64]
        });
        (psi.layout().labels().to_vec(), q.collect())
    }

    pub fn classify(&mut self, state: &FactoredState) -> Result<RefereeVerdict> {
        let psi = state.factor_of(REFERENCE)?;
        let key = Self::key(psi);
        if let Some(v) = self.entries.get(&key) {
            self.hits += 1;
            return Ok(*v);
        }
        self.misses += 1;
        let v = classify_factor(self.task, psi, &self.partition, self.eps0)?;
        self.entries.insert(key, v);
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{c, CMatrix};
    use crate::qcore::random::{haar_state, haar_unitary, random_density, seeded_rng};
    use crate::qcore::{purified_distance, RegisterLayout};
    use crate::tasks::EPS0_ROUTING;
    use rand::Rng;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn classical_copy(basis: Basis) -> DensityOperator {
        let d = 8;
        let m = CMatrix::from_fn(d, d, |i, j| c(if i == j && (i == 0 || i == 7) { 0.5 } else { 0.0 }, 0.0));
        let mut rho = DensityOperator::new(RegisterLayout::qubits(&["R", "M", "N"]).unwrap(), m).unwrap();
        if basis == Basis::Hadamard {
            rho.apply_unitary(&["R"], &crate::qcore::channel::hadamard()).unwrap();
            rho.apply_unitary(&["M"], &crate::qcore::channel::hadamard()).unwrap();
            rho.apply_unitary(&["N"], &crate::qcore::channel::hadamard()).unwrap();
        }
        rho
    }

    #[test]
    fn routing_examples() {
        let junk = random_density(&RegisterLayout::qubits(&["N"]).unwrap(), 2, &mut seeded_rng(1)).unwrap();
        let phi = PureState::phi_plus("R", "M").unwrap().density();
        let rho0 = phi.tensor(&junk).unwrap();
        assert_eq!(classify_routing(&rho0, &["M"], &["N"], EPS0_ROUTING).unwrap().side, Verdict::Zero);
        let rho1 = PureState::phi_plus("R", "N").unwrap().density().tensor(&junk.relabel("N", "M").unwrap()).unwrap();
        assert_eq!(classify_routing(&rho1, &["M"], &["N"], EPS0_ROUTING).unwrap().side, Verdict::One);
        let product = DensityOperator::maximally_mixed(RegisterLayout::qubits(&["R", "M", "N"]).unwrap());
        let v = classify_routing(&product, &["M"], &["N"], EPS0_ROUTING).unwrap();
        assert_eq!(v.side, Verdict::Abstain);
        for p in v.witness {
            assert!((p - 0.75f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn bb84_examples() {
        let v = classify_bb84(&classical_copy(Basis::Computational), &["M"], &["N"], 0.11).unwrap();
        assert_eq!(v.side, Verdict::Zero);
        assert!((v.witness[0] - 1.0).abs() < 1e-12);
        let v = classify_bb84(&classical_copy(Basis::Hadamard), &["M"], &["N"], 0.11).unwrap();
        assert_eq!(v.side, Verdict::One);
        let product = DensityOperator::maximally_mixed(RegisterLayout::qubits(&["R", "M", "N"]).unwrap());
        let v = classify_bb84(&product, &["M"], &["N"], 0.11).unwrap();
        assert_eq!(v.side, Verdict::Abstain);
        assert!((v.witness[0] - 0.5).abs() < 1e-12 && (v.witness[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn factored_path_matches_dense() {
        let mut rng = seeded_rng(2);
        let partition = Partition { m0: strings(&["A", "B"]), m1p: strings(&["C"]), ..Default::default() };
        for _ in 0..10 {
            let psi = haar_state(&RegisterLayout::qubits(&["R", "A", "C"]).unwrap(), &mut rng);
            let other = haar_state(&RegisterLayout::qubits(&["B"]).unwrap(), &mut rng);
            let st = FactoredState::new(vec![psi.clone(), other.clone()]).unwrap();
            let dense = psi.tensor(&other).unwrap().density();
            for task in [TaskKind::Routing, TaskKind::Bb84] {
                let eps0 = if task == TaskKind::Routing { EPS0_ROUTING } else { 0.11 };
                let fast = classify_factored(task, &st, &partition, eps0).unwrap();
                let slow = match task {
                    TaskKind::Routing => classify_routing(&dense, &["A", "B"], &["C"], eps0).unwrap(),
                    TaskKind::Bb84 => classify_bb84(&dense, &["A", "B"], &["C"], eps0).unwrap(),
                };
                assert_eq!(fast.side, slow.side);
                for k in 0..2 {
                    assert!((fast.witness[k] - slow.witness[k]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn cache_ignores_global_phase() {
        let p = Partition { m0: strings(&["M"]), m1p: strings(&["N"]), ..Default::default() };
        let mut cache = VerdictCache::new(TaskKind::Routing, p, EPS0_ROUTING);
        let a = PureState::phi_plus("R", "M").unwrap();
        let mut b = a.clone();
        b.apply_unitary(&["R"], &(crate::qcore::linalg::identity(2) * c(0.0, 1.0))).unwrap();
        let n = PureState::zeros(&["N"]).unwrap();
        let sa = FactoredState::new(vec![a, n.clone()]).unwrap();
        let sb = FactoredState::new(vec![b, n]).unwrap();
        let va = cache.classify(&sa).unwrap();
        let vb = cache.classify(&sb).unwrap();
        assert_eq!(va, vb);
        assert_eq!((cache.hits, cache.misses), (1, 1));
    }

    /// `Φ⁺_{RQ}` pushed into `side` through a random isometry, with the other
    /// side in an independent random state.
    fn embedded(into: &[&str; 2], other: &[&str; 2], rng: &mut crate::qcore::random::LabRng) -> DensityOperator {
        let mut emb = PureState::phi_plus("R", into[0]).unwrap().tensor(&PureState::zeros(&[into[1]]).unwrap()).unwrap();
        emb.apply_unitary(into, &haar_unitary(4, rng)).unwrap();
        let junk = haar_state(&RegisterLayout::qubits(other).unwrap(), rng);
        emb.tensor(&junk).unwrap().density().reorder(&["R", "M0", "M1", "N0", "N1"]).unwrap()
    }

    #[test]
    fn separation_floor_and_disjointness() {
        let mut rng = seeded_rng(3);
        let m = ["M0", "M1"];
        let n = ["N0", "N1"];
        for _ in 0..100 {
            let r0 = embedded(&m, &n, &mut rng);
            let r1 = embedded(&n, &m, &mut rng);
            let p = purified_distance(&r0, &r1).unwrap();
            assert!(p >= 0.75f64.sqrt() - 1e-6, "P = {p}");
            let v0 = classify_routing(&r0, &m, &n, EPS0_ROUTING).unwrap();
            let v1 = classify_routing(&r1, &m, &n, EPS0_ROUTING).unwrap();
            assert_eq!((v0.side, v1.side), (Verdict::Zero, Verdict::One));
        }
        for _ in 0..100 {
            let rho = random_density(&RegisterLayout::qubits(&["R", "M0", "N0"]).unwrap(), 1 + rng.random_range(0..4), &mut rng).unwrap();
            assert!(!classify_routing(&rho, &["M0"], &["N0"], EPS0_ROUTING).unwrap().both_clear());
            assert!(!classify_bb84(&rho, &["M0"], &["N0"], 0.11).unwrap().both_clear());
        }
    }
}
