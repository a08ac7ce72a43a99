//! Honest single-location provers, who know both `x` and `y`.

use super::evaluate::{default_threshold, CorrectnessReport, InputResult};
use super::function::BooleanFunction;
use super::strategy::{TaskKind, INPUT_QUBIT, REFERENCE};
use crate::qcore::channel::ChannelRep;
use crate::qcore::entropy::{measure_pure_in_basis, outcome_distribution, Basis};
use crate::qcore::layout::RegisterLayout;
use crate::qcore::measures::purified_distance;
use crate::qcore::PureState;
use crate::Result;

/// Success probability when the prover measures `Q` in `prover` and the
/// referee measures `R` in `referee`; both of the prover's outputs carry the
/// same outcome.
pub fn honest_bb84_in_basis(prover: Basis, referee: Basis) -> Result<f64> {
    let psi = PureState::phi_plus(REFERENCE, INPUT_QUBIT)?;
    let mut success = 0.0;
    for o in measure_pure_in_basis(&psi, INPUT_QUBIT, prover)? {
        let pr = outcome_distribution(&o.post_state, REFERENCE, referee)?;
        success += o.probability * pr[o.outcome as usize];
    }
    Ok(success)
}

pub fn honest_bb84(f: &BooleanFunction, x: &[bool], y: &[bool]) -> Result<f64> {
    let b = Basis::from_bit(f.eval(x, y)?);
    honest_bb84_in_basis(b, b)
}

/// Purified distance after the prover forwards `Q` unchanged to side `f(x, y)`.
pub fn honest_routing(f: &BooleanFunction, x: &[bool], y: &[bool]) -> Result<f64> {
    let out = if f.eval(x, y)? { "Q_bob" } else { "Q_alice" };
    let rho = PureState::phi_plus(REFERENCE, INPUT_QUBIT)?.density();
    let forwarded = rho.apply_channel(&ChannelRep::identity(RegisterLayout::qubits(&[INPUT_QUBIT])?))?.relabel(INPUT_QUBIT, out)?;
    let target = PureState::phi_plus(REFERENCE, out)?.density();
    purified_distance(&forwarded, &target)
}

pub fn honest_report(task: TaskKind, f: &BooleanFunction) -> Result<CorrectnessReport> {
    let rows = f
        .inputs()
        .map(|(x, y)| {
            let fx = f.eval(&x, &y)?;
            let (epsilon, success_prob) = match task {
                TaskKind::Bb84 => {
                    let s = honest_bb84(f, &x, &y)?;
                    (1.0 - s, s)
                }
                TaskKind::Routing => {
                    let e = honest_routing(f, &x, &y)?;
                    (e, 1.0 - e * e)
                }
            };
            Ok(InputResult { x, y, f: fx, epsilon, success_prob, branches: 1, c_g: 0, c_m: 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrectnessReport::new("honest", task, f, default_threshold(task), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::function::Builtin;

    #[test]
    fn honest_bb84_is_exact() {
        for n in 1..=2 {
            let f = BooleanFunction::ip(n).unwrap();
            for (x, y) in f.inputs() {
                assert!((honest_bb84(&f, &x, &y).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        let c = BooleanFunction::builtin(Builtin::Const1, 1).unwrap();
        assert!((honest_bb84(&c, &[false], &[true]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_basis_gives_half() {
        for b in [Basis::Computational, Basis::Hadamard] {
            let other = Basis::from_bit(!b.bit());
            assert!((honest_bb84_in_basis(other, b).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn honest_routing_is_exact() {
        let f = BooleanFunction::ip(2).unwrap();
        let r = honest_report(TaskKind::Routing, &f).unwrap();
        assert!(r.worst_epsilon < 1e-9);
        assert_eq!(r.delta_fraction, 1.0);
    }
}
