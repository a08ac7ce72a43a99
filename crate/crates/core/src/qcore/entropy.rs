//! Von Neumann entropies, basis measurements and the two entropy inequalities
//! used by the separation arguments.

use serde::{Deserialize, Serialize};

use super::channel::hadamard;
use super::linalg::ZERO;
use super::measures::trace_distance;
use super::state::{DensityOperator, PureState};
use crate::{Error, Result};

/// Measurement basis of a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Computational,
    Hadamard,
}

impl Basis {
    pub fn from_bit(b: bool) -> Self {
        if b {
            Basis::Hadamard
        } else {
            Basis::Computational
        }
    }

    pub fn bit(self) -> bool {
        self == Basis::Hadamard
    }
}

/// `-x log x - (1-x) log(1-x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    xlogx(x) + xlogx(1.0 - x)
}

/// `-x log₂ x` with `0 log 0 = 0`.
fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    Ok(rho.eigenvalues()?.into_iter().map(xlogx).sum())
}

/// `H(A|B) = S(AB) - S(B)`; an empty `b` gives `S(A)`.
pub fn conditional_entropy<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    for l in a {
        if b.iter().any(|m| m.as_ref() == l.as_ref()) {
            return Err(Error::InvalidArgument(format!("`{}` appears in both subsystem sets", l.as_ref())));
        }
    }
    let ab: Vec<&str> = a.iter().map(|s| s.as_ref()).chain(b.iter().map(|s| s.as_ref())).collect();
    let s_ab = von_neumann_entropy(&rho.partial_trace(&ab)?)?;
    if b.is_empty() {
        return Ok(s_ab);
    }
    let s_b = von_neumann_entropy(&rho.partial_trace(b)?)?;
    Ok(s_ab - s_b)
}

/// One outcome of a projective qubit measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub outcome: u8,
    pub probability: f64,
    /// Renormalized post-measurement state; the measured qubit stays in the register.
    pub post_state: DensityOperator,
}

/// Measures qubit `target` with projectors `H^q |b><b| H^q`. Zero-probability
/// outcomes are omitted.
pub fn measure_in_basis(rho: &DensityOperator, target: &str, basis: Basis) -> Result<Vec<MeasurementOutcome>> {
    if rho.layout().dim_of(target)? != 2 {
        return Err(Error::Dimension(format!("`{target}` is not a qubit")));
    }
    let rotate = |state: &mut DensityOperator| -> Result<()> {
        if basis == Basis::Hadamard {
            state.apply_unitary(&[target], &hadamard())?;
        }
        Ok(())
    };
    let mut rotated = rho.clone();
    rotate(&mut rotated)?;
    let mut out = Vec::new();
    for b in 0..2u8 {
        let (p, post) = rotated.project(target, b as usize)?;
        if let Some(mut post) = post {
            rotate(&mut post)?;
            out.push(MeasurementOutcome { outcome: b, probability: p, post_state: post });
        }
    }
    Ok(out)
}

/// Pure-state convenience wrapper around [`measure_in_basis`].
pub fn measure_pure_in_basis(psi: &PureState, target: &str, basis: Basis) -> Result<Vec<MeasurementOutcome>> {
    measure_in_basis(&psi.density(), target, basis)
}

/// The classical-quantum state `Σ_b p_b |b><b|_Z ⊗ ρ_b` obtained by measuring
/// `target` in `basis`. The classical register keeps the target's position and
/// is named `z_label`.
pub fn dephase(rho: &DensityOperator, target: &str, basis: Basis, z_label: &str) -> Result<DensityOperator> {
    let mut state = rho.clone();
    if basis == Basis::Hadamard {
        state.apply_unitary(&[target], &hadamard())?;
    }
    let layout = state.layout().clone();
    let pos = layout.position(target)?;
    let stride: usize = layout.dims()[pos + 1..].iter().product();
    let dt = layout.dims()[pos];
    let digit = |i: usize| (i / stride) % dt;
    let mut m = state.matrix().clone();
    let d = m.nrows();
    for i in 0..d {
        for j in 0..d {
            if digit(i) != digit(j) {
                m[(i, j)] = ZERO;
            }
        }
    }
    DensityOperator::from_parts(layout.renamed(target, z_label)?, m)
}

/// `H(Z|E)_ρ + H(Z|F)_σ - 1` where `ρ` and `σ` come from measuring the qubit
/// `r` of `psi` in the computational and Hadamard bases.
pub fn cit_gap<S: AsRef<str>>(psi: &PureState, r: &str, e: &[S], f: &[S]) -> Result<f64> {
    let rho = psi.density();
    cit_gap_mixed(&rho, r, e, f)
}

/// Same quantity for a mixed input; the inequality still holds since a
/// purification only adds a system that is traced away.
pub fn cit_gap_mixed<S: AsRef<str>>(rho: &DensityOperator, r: &str, e: &[S], f: &[S]) -> Result<f64> {
    if rho.layout().dim_of(r)? != 2 {
        return Err(Error::Dimension(format!("`{r}` is not a qubit")));
    }
    let z = "__Z";
    let zc = dephase(rho, r, Basis::Computational, z)?;
    let zh = dephase(rho, r, Basis::Hadamard, z)?;
    let e: Vec<&str> = e.iter().map(|s| s.as_ref()).collect();
    let f: Vec<&str> = f.iter().map(|s| s.as_ref()).collect();
    let h_e = conditional_entropy(&zc, &[z], &e)?;
    let h_f = conditional_entropy(&zh, &[z], &f)?;
    Ok(h_e + h_f - 1.0)
}

/// Winter's bound on `|H(A|B)_ρ - H(A|B)_σ|`: `2ε log d_A + (1+ε) h(ε/(1+ε))`.
pub fn continuity_bound(eps: f64, d_a: usize) -> f64 {
    2.0 * eps * (d_a as f64).log2() + (1.0 + eps) * binary_entropy(eps / (1.0 + eps))
}

/// `bound - |H(A|B)_ρ - H(A|B)_σ|` with `ε` the trace distance of the AB marginals.
pub fn continuity_gap<S: AsRef<str>>(rho: &DensityOperator, sigma: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    let ab: Vec<&str> = a.iter().map(|s| s.as_ref()).chain(b.iter().map(|s| s.as_ref())).collect();
    let rho_ab = rho.partial_trace(&ab)?;
    let sigma_ab = sigma.partial_trace(&ab)?;
    let eps = trace_distance(&rho_ab, &sigma_ab)?;
    let d_a = rho.layout().dim_of_set(a)?;
    let diff = (conditional_entropy(&rho_ab, a, b)? - conditional_entropy(&sigma_ab, a, b)?).abs();
    Ok(continuity_bound(eps, d_a) - diff)
}

/// Diagonal of the reduced state of `target` in `basis`.
pub fn outcome_distribution(rho: &DensityOperator, target: &str, basis: Basis) -> Result<[f64; 2]> {
    let mut r = rho.partial_trace(&[target])?;
    if basis == Basis::Hadamard {
        r.apply_unitary(&[target], &hadamard())?;
    }
    let m = r.matrix();
    Ok([m[(0, 0)].re, m[(1, 1)].re])
}

/// `I(A:B) = S(A) - H(A|B)`.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityOperator, a: &[S], b: &[S]) -> Result<f64> {
    let h_a = conditional_entropy(rho, a, &[] as &[S])?;
    Ok(h_a - conditional_entropy(rho, a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::layout::RegisterLayout;
    use crate::qcore::linalg::{c, real_matrix};
    use crate::qcore::random::{haar_state, random_density, seeded_rng};

    fn bell() -> PureState {
        PureState::phi_plus("A", "B").unwrap()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        let h = binary_entropy(0.11);
        // -0.11 log2 0.11 - 0.89 log2 0.89 evaluated independently
        let oracle = 0.11 * (1.0f64 / 0.11).ln() / 2f64.ln() + 0.89 * (1.0f64 / 0.89).ln() / 2f64.ln();
        assert!((h - oracle).abs() < 1e-14);
        assert!((h - 0.499916).abs() < 1e-6);
        assert!(1.0 - 2.0 * h > 0.0);
    }

    #[test]
    fn conditional_entropy_examples() {
        let rho = bell().density();
        assert!((conditional_entropy(&rho, &["A"], &["B"]).unwrap() + 1.0).abs() < 1e-9);
        let mixed = DensityOperator::maximally_mixed(RegisterLayout::qubits(&["A", "B"]).unwrap());
        assert!((conditional_entropy(&mixed, &["A"], &["B"]).unwrap() - 1.0).abs() < 1e-12);
        let classical = DensityOperator::new(
            RegisterLayout::qubits(&["A", "B"]).unwrap(),
            real_matrix(4, 4, &[0.5, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.5]),
        )
        .unwrap();
        assert!(conditional_entropy(&classical, &["A"], &["B"]).unwrap().abs() < 1e-12);
        assert!(conditional_entropy(&rho, &["A"], &["A"]).is_err());
    }

    #[test]
    fn bell_measurements() {
        let rho = bell().density();
        for basis in [Basis::Computational, Basis::Hadamard] {
            let outs = measure_in_basis(&rho, "A", basis).unwrap();
            assert_eq!(outs.len(), 2);
            for o in &outs {
                assert!((o.probability - 0.5).abs() < 1e-12);
                // post-state is |bb> in the chosen basis, so both qubits agree
                let dist = outcome_distribution(&o.post_state, "B", basis).unwrap();
                assert!((dist[o.outcome as usize] - 1.0).abs() < 1e-12);
            }
        }
        let comp = measure_in_basis(&rho, "A", Basis::Computational).unwrap();
        assert!((comp[1].post_state.matrix()[(3, 3)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_state_is_uniform_in_computational_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureState::qubit("A", c(s, 0.0), c(s, 0.0)).unwrap();
        let outs = measure_pure_in_basis(&plus, "A", Basis::Computational).unwrap();
        assert!(outs.iter().all(|o| (o.probability - 0.5).abs() < 1e-12));
        let had = measure_pure_in_basis(&plus, "A", Basis::Hadamard).unwrap();
        assert_eq!(had.len(), 1);
    }

    #[test]
    fn cit_examples() {
        let psi = PureState::phi_plus("R", "E").unwrap().tensor(&PureState::zeros(&["F"]).unwrap()).unwrap();
        assert!(cit_gap(&psi, "R", &["E"], &["F"]).unwrap().abs() < 1e-9);
        let psi = PureState::zeros(&["R"]).unwrap().tensor(&bell().relabel("A", "E").unwrap().relabel("B", "F").unwrap()).unwrap();
        let dephased = dephase(&psi.density(), "R", Basis::Computational, "Z").unwrap();
        assert!(conditional_entropy(&dephased, &["Z"], &["E"]).unwrap().abs() < 1e-9);
        assert!(cit_gap(&psi, "R", &["E"], &["F"]).unwrap().abs() < 1e-9);
    }

    #[test]
    fn cit_holds_on_haar_states() {
        let mut rng = seeded_rng(2);
        for trial in 0..1000 {
            let de = if trial % 2 == 0 { 2 } else { 4 };
            let df = if (trial / 2) % 2 == 0 { 2 } else { 4 };
            let layout = RegisterLayout::new([("R", 2), ("E", de), ("F", df)]).unwrap();
            let psi = haar_state(&layout, &mut rng);
            let gap = cit_gap(&psi, "R", &["E"], &["F"]).unwrap();
            assert!(gap >= -1e-9, "trial {trial}: gap {gap}");
            let cq = dephase(&psi.density(), "R", Basis::Computational, "Z").unwrap();
            let h = conditional_entropy(&cq, &["Z"], &["E"]).unwrap();
            assert!((-1e-9..=1.0 + 1e-9).contains(&h));
        }
    }

    #[test]
    fn continuity_examples_and_battery() {
        let rho = bell().density();
        let gap = continuity_gap(&rho, &rho, &["A"], &["B"]).unwrap();
        assert!(gap.abs() < 1e-9);
        let zero = PureState::zeros(&["A"]).unwrap().density();
        let one = PureState::basis(RegisterLayout::qubits(&["A"]).unwrap(), 1).unwrap().density();
        let empty: [&str; 0] = [];
        let gap = continuity_gap(&zero, &one, &["A"], &empty).unwrap();
        assert!(gap >= 0.0);
        let mut rng = seeded_rng(3);
        let layout = RegisterLayout::qubits(&["A", "B"]).unwrap();
        for trial in 0..1000 {
            let r = random_density(&layout, 1 + trial % 4, &mut rng).unwrap();
            let s = random_density(&layout, 1 + (trial / 4) % 4, &mut rng).unwrap();
            let gap = continuity_gap(&r, &s, &["A"], &["B"]).unwrap();
            assert!(gap >= -1e-9, "trial {trial}: gap {gap}");
        }
    }
}
