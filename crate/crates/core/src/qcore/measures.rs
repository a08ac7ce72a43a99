//! Distances between states and the optimal binary guessing probability.

use super::linalg::{self, c, clip_eigenvalue, CMatrix};
use super::state::DensityOperator;
use crate::{Error, Result};

/// Aligns `sigma` to the layout of `rho` or fails with a layout mismatch.
fn aligned(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DensityOperator> {
    sigma.aligned_to(rho.layout())
}

/// Eigenvalues below this fraction of the largest are treated as exact zeros
/// when taking square roots, so rounding noise on a null space does not leak
/// into the fidelity as `sqrt(1e-17)`.
const SUPPORT_CUTOFF: f64 = 1e-14;

fn support_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = linalg::eigh(m);
    let top = vals.last().copied().unwrap_or(0.0).max(1.0);
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let v = clip_eigenvalue(v)?;
        let s = if v <= SUPPORT_CUTOFF * top { 0.0 } else { v.sqrt() };
        scaled.column_mut(k).scale_mut(s);
    }
    Ok(scaled * vecs.adjoint())
}

/// Uhlmann fidelity `tr sqrt(sqrt(σ) ρ sqrt(σ))`, clamped to `[0, 1]`.
/// Evaluated as the trace norm of `sqrt(ρ) sqrt(σ)`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = aligned(rho, sigma)?;
    let prod = support_sqrt(rho.matrix())? * support_sqrt(sigma.matrix())?;
    let f: f64 = prod.singular_values().iter().sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `sqrt(1 - F²)`.
pub fn purified_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// `½ ‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let sigma = aligned(rho, sigma)?;
    Ok((0.5 * linalg::trace_norm_hermitian(&(rho.matrix() - sigma.matrix()))).clamp(0.0, 1.0))
}

/// Optimal probability of telling `ρ0` (prior `p0`) from `ρ1` (prior `p1`):
/// `½(1 + ‖p0 ρ0 - p1 ρ1‖₁)`.
pub fn helstrom_guess_prob(p0: f64, rho0: &DensityOperator, p1: f64, rho1: &DensityOperator) -> Result<f64> {
    if p0 < 0.0 || p1 < 0.0 || (p0 + p1 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("priors {p0}, {p1} do not form a distribution")));
    }
    let rho1 = aligned(rho0, rho1)?;
    let diff = rho0.matrix() * c(p0, 0.0) - rho1.matrix() * c(p1, 0.0);
    Ok(0.5 * (1.0 + linalg::trace_norm_hermitian(&diff)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::layout::RegisterLayout;
    use crate::qcore::linalg::ZERO;
    use crate::qcore::random::{random_density, seeded_rng};
    use crate::qcore::state::PureState;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(a0: f64, a1: f64) -> DensityOperator {
        PureState::qubit("A", c(a0, 0.0), c(a1, 0.0)).unwrap().density()
    }

    fn mixed() -> DensityOperator {
        DensityOperator::maximally_mixed(RegisterLayout::qubits(&["A"]).unwrap())
    }

    #[test]
    fn fidelity_examples() {
        let zero = ket(1.0, 0.0);
        let plus = ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!((fidelity(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        // sqrt(σ) ρ sqrt(σ) for σ = |0><0|, ρ = I/2 is diag(1/2, 0)
        assert!((fidelity(&mixed(), &zero).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn distance_examples() {
        let zero = ket(1.0, 0.0);
        let one = ket(0.0, 1.0);
        let plus = ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!(purified_distance(&zero, &zero).unwrap() < 1e-12);
        assert!((purified_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((purified_distance(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-15);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&mixed(), &zero).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn helstrom_examples() {
        let zero = ket(1.0, 0.0);
        let one = ket(0.0, 1.0);
        let plus = ket(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        assert!((helstrom_guess_prob(0.5, &zero, 0.5, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((helstrom_guess_prob(0.3, &plus, 0.7, &plus).unwrap() - 0.7).abs() < 1e-12);
        // ½(ρ0 - ρ1) has eigenvalues ±1/(2√2)
        let expect = 0.5 * (1.0 + FRAC_1_SQRT_2);
        assert!((helstrom_guess_prob(0.5, &zero, 0.5, &plus).unwrap() - expect).abs() < 1e-12);
        assert!(helstrom_guess_prob(0.5, &zero, 0.6, &plus).is_err());
    }

    #[test]
    fn mismatched_layouts_rejected() {
        let a = ket(1.0, 0.0);
        let b = PureState::qubit("B", c(1.0, 0.0), ZERO).unwrap().density();
        assert!(matches!(fidelity(&a, &b), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn fuchs_van_de_graaf_and_triangle() {
        let mut rng = seeded_rng(11);
        for trial in 0..500 {
            let labels: &[&str] = if trial % 2 == 0 { &["A"] } else { &["A", "B"] };
            let l = RegisterLayout::qubits(labels).unwrap();
            let r = random_density(&l, 1 + trial % 3, &mut rng).unwrap();
            let s = random_density(&l, 1 + (trial / 3) % 3, &mut rng).unwrap();
            let t = random_density(&l, 2, &mut rng).unwrap();
            let f = fidelity(&r, &s).unwrap();
            let f_rev = fidelity(&s, &r).unwrap();
            assert!((f - f_rev).abs() < 1e-9, "asymmetric fidelity {f} vs {f_rev}");
            let td = trace_distance(&r, &s).unwrap();
            assert!(1.0 - f <= td + 1e-9);
            assert!(td <= (1.0 - f * f).max(0.0).sqrt() + 1e-9);
            let prs = purified_distance(&r, &s).unwrap();
            let prt = purified_distance(&r, &t).unwrap();
            let pts = purified_distance(&t, &s).unwrap();
            assert!(prt + pts - prs >= -1e-9);
        }
    }
}
