//! Randomized checks of the entropic inequalities and separation properties
//! the reduction rests on. Each battery reports its worst margin; a margin
//! below `-tolerance` is a violation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hmin::hmin;
use super::referee::{classify_bb84, classify_routing, Verdict};
use crate::qcore::entropy::{binary_entropy, cit_gap, conditional_entropy, continuity_gap, dephase, Basis};
use crate::qcore::random::{haar_state, haar_unitary, random_density, seeded_rng, LabRng};
use crate::qcore::{purified_distance, ChannelRep, DensityOperator, PureState, RegisterLayout};
use crate::tasks::{EPS0_BB84, EPS0_ROUTING};
use crate::Result;

pub const ENTROPY_TOL: f64 = 1e-9;
pub const SDP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub name: String,
    pub samples: usize,
    /// Smallest observed margin; nonnegative when the inequality holds exactly.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub violations: usize,
}

impl BatteryResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Tally {
    name: &'static str,
    tol: f64,
    worst: f64,
    samples: usize,
    violations: usize,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self { name, tol, worst: f64::INFINITY, samples: 0, violations: 0 }
    }

    fn push(&mut self, margin: f64) {
        self.samples += 1;
        self.worst = self.worst.min(margin);
        if !(margin >= -self.tol) {
            self.violations += 1;
        }
    }

    fn finish(self) -> BatteryResult {
        BatteryResult { name: self.name.into(), samples: self.samples, worst_margin: self.worst, tolerance: self.tol, violations: self.violations }
    }
}

/// `H(Z|E) + H(Z|F) ≥ 1` on Haar-random pure states of three qubits.
pub fn cit_battery(samples: usize, seed: u64) -> Result<BatteryResult> {
    let mut rng = seeded_rng(seed);
    let layout = RegisterLayout::qubits(&["R", "E", "F"])?;
    let mut t = Tally::new("cit", ENTROPY_TOL);
    for _ in 0..samples {
        let psi = haar_state(&layout, &mut rng);
        t.push(cit_gap(&psi, "R", &["E"], &["F"])?);
    }
    Ok(t.finish())
}

/// Continuity of `H(A|B)` in trace distance on random two-qubit pairs of
/// mixed rank.
pub fn continuity_battery(samples: usize, seed: u64) -> Result<BatteryResult> {
    let mut rng = seeded_rng(seed);
    let layout = RegisterLayout::qubits(&["A", "B"])?;
    let mut t = Tally::new("continuity", ENTROPY_TOL);
    for _ in 0..samples {
        let rho = random_density(&layout, rng.random_range(1..=4), &mut rng)?;
        let sigma = if rng.random_bool(0.5) {
            random_density(&layout, rng.random_range(1..=4), &mut rng)?
        } else {
            // nearby pairs probe the small-ε regime
            let w = rng.random_range(0.0..0.2);
            DensityOperator::mixture(&[(1.0 - w, rho.clone()), (w, random_density(&layout, 4, &mut rng)?)])?
        };
        t.push(continuity_gap(&rho, &sigma, &["A"], &["B"])?);
    }
    Ok(t.finish())
}

/// `Φ⁺_{R,into[0]}` spread over both qubits of `into` by a random unitary,
/// next to a random pure state on `other`; ordered `R, M0, M1, N0, N1`.
pub fn embedded_pair_state(into: &[&str; 2], other: &[&str; 2], rng: &mut LabRng) -> Result<DensityOperator> {
    let mut emb = PureState::phi_plus("R", into[0])?.tensor(&PureState::zeros(&[into[1]])?)?;
    emb.apply_unitary(into, &haar_unitary(4, rng))?;
    let junk = haar_state(&RegisterLayout::qubits(other)?, rng);
    emb.tensor(&junk)?.density().reorder(&["R", "M0", "M1", "N0", "N1"])
}

/// Pairs recoverable from opposite sides sit at purified distance at least
/// √3/2, and the routing referee assigns each to its side.
pub fn routing_floor_battery(samples: usize, seed: u64) -> Result<BatteryResult> {
    let mut rng = seeded_rng(seed);
    let (m, n) = (["M0", "M1"], ["N0", "N1"]);
    let floor = 0.75f64.sqrt();
    let mut t = Tally::new("routing_floor", SDP_TOL);
    for _ in 0..samples {
        let r0 = embedded_pair_state(&m, &n, &mut rng)?;
        let r1 = embedded_pair_state(&n, &m, &mut rng)?;
        let v0 = classify_routing(&r0, &m, &n, EPS0_ROUTING)?;
        let v1 = classify_routing(&r1, &m, &n, EPS0_ROUTING)?;
        let margin = purified_distance(&r0, &r1)? - floor;
        t.push(if v0.side == Verdict::Zero && v1.side == Verdict::One { margin } else { margin.min(-1.0) });
    }
    Ok(t.finish())
}

/// No state is accepted by both sides of either referee. The margin is the
/// excess of the better side's witness over the acceptance threshold on the
/// worse side.
pub fn disjointness_battery(samples: usize, seed: u64) -> Result<BatteryResult> {
    let mut rng = seeded_rng(seed);
    let layout = RegisterLayout::qubits(&["R", "M0", "N0"])?;
    let mut t = Tally::new("disjointness", 0.0);
    for k in 0..samples {
        let rho = if k % 2 == 0 {
            random_density(&layout, rng.random_range(1..=4), &mut rng)?
        } else {
            // mixtures of side-0 and side-1 recoverable states sit near both sets
            let a = PureState::phi_plus("R", "M0")?.tensor(&PureState::zeros(&["N0"])?)?.density();
            let b = PureState::phi_plus("R", "N0")?.tensor(&PureState::zeros(&["M0"])?)?.density().reorder(&["R", "M0", "N0"])?;
            let w = rng.random_range(0.0..1.0);
            DensityOperator::mixture(&[(w, a), (1.0 - w, b)])?
        };
        let r = classify_routing(&rho, &["M0"], &["N0"], EPS0_ROUTING)?;
        let b = classify_bb84(&rho, &["M0"], &["N0"], EPS0_BB84)?;
        let clear = r.both_clear() || b.both_clear();
        t.push(if clear { -1.0 } else { 0.0 });
    }
    Ok(t.finish())
}

/// Guessing `R`'s computational outcome from `M` with error `ε ≤ ½` forces
/// `H(Z_H|M') ≥ 1 − h(ε)` for the Hadamard outcome.
pub fn bb84_uncertainty_battery(samples: usize, seed: u64) -> Result<BatteryResult> {
    let mut rng = seeded_rng(seed);
    let mut t = Tally::new("bb84_uncertainty", SDP_TOL);
    let (m, mp) = (["M0", "M1"], ["N0", "N1"]);
    for _ in 0..samples {
        let base = embedded_pair_state(&m, &mp, &mut rng)?;
        let p = rng.random_range(0.0..0.6);
        let rho = ChannelRep::depolarizing("R", p)?.apply(&base)?;
        let v = classify_bb84(&rho, &m, &mp, EPS0_BB84)?;
        let guess = v.guess.expect("bb84 verdict carries guesses")[0][0];
        let eps = (1.0 - guess).clamp(0.0, 0.5);
        let sigma = dephase(&rho, "R", Basis::Hadamard, "Z")?;
        let h = conditional_entropy(&sigma, &["Z"], &mp)?;
        t.push(h - (1.0 - binary_entropy(eps)));
    }
    Ok(t.finish())
}

/// Closed forms of the recovery fidelity: `Φ⁺` gives 1, `I/4` gives ½ and the
/// classically correlated state gives `1/√2`.
pub fn hmin_closed_forms() -> Result<BatteryResult> {
    let mut t = Tally::new("hmin_closed_forms", SDP_TOL);
    let phi = PureState::phi_plus("R", "B")?.density();
    let mixed = DensityOperator::maximally_mixed(RegisterLayout::qubits(&["R", "B"])?);
    let classical = DensityOperator::mixture(&[(0.5, PureState::zeros(&["R", "B"])?.density()), (0.5, PureState::basis(RegisterLayout::qubits(&["R", "B"])?, 3)?.density())])?;
    for (rho, f) in [(phi, 1.0), (mixed, 0.5), (classical, 0.5f64.sqrt())] {
        let r = hmin(&rho, "R", &["B"])?;
        t.push(-(r.recovery_fidelity() - f).abs());
    }
    Ok(t.finish())
}

/// Sample counts for [`run_all`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryCounts {
    pub cit: usize,
    pub continuity: usize,
    pub routing_floor: usize,
    pub disjointness: usize,
    pub bb84_uncertainty: usize,
}

impl Default for BatteryCounts {
    fn default() -> Self {
        Self { cit: 1000, continuity: 1000, routing_floor: 100, disjointness: 100, bb84_uncertainty: 100 }
    }
}

/// All batteries, each seeded from `seed` plus its position.
pub fn run_all(counts: BatteryCounts, seed: u64) -> Result<Vec<BatteryResult>> {
    Ok(vec![
        cit_battery(counts.cit, seed)?,
        continuity_battery(counts.continuity, seed.wrapping_add(1))?,
        routing_floor_battery(counts.routing_floor, seed.wrapping_add(2))?,
        disjointness_battery(counts.disjointness, seed.wrapping_add(3))?,
        bb84_uncertainty_battery(counts.bb84_uncertainty, seed.wrapping_add(4))?,
        hmin_closed_forms()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batteries_pass() {
        let counts = BatteryCounts { cit: 50, continuity: 50, routing_floor: 10, disjointness: 20, bb84_uncertainty: 20 };
        for r in run_all(counts, 11).unwrap() {
            assert!(r.passed(), "{r:?}");
            assert!(r.samples > 0);
        }
    }

    #[test]
    fn tally_counts_nan_as_violation() {
        let mut t = Tally::new("x", 1e-9);
        t.push(f64::NAN);
        t.push(0.5);
        let r = t.finish();
        assert_eq!((r.samples, r.violations), (2, 1));
    }

    #[test]
    fn uncertainty_bound_is_tight_for_perfect_copies() {
        // R copied into M: ε = 0 and the Hadamard outcome is uniform given M'
        let r = bb84_uncertainty_battery(5, 2).unwrap();
        assert!(r.passed());
    }
}
