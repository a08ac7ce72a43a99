//! Closed-form communication lower bounds and the inequality audit that ties
//! attack costs to them.

use serde::{Deserialize, Serialize};

use crate::circuits::ceil_log2;
use crate::{Error, Result};

/// `max{½(1−2ε)², (1−2ε)⁴}·n − ½`, clamped at 0.
pub fn cleve_ip_bound(n: usize, eps: f64) -> f64 {
    let b = (1.0 - 2.0 * eps).max(0.0);
    let n = n as f64;
    ((0.5 * b * b).max(b.powi(4)) * n - 0.5).max(0.0)
}

/// `max{½n + 2 log₂(1−2ε), (1−2ε)⁴·n − ½}`, clamped at 0. At `ε = ½` the
/// logarithm diverges and the second branch decides.
pub fn nayak_ip_bound(n: usize, eps: f64) -> f64 {
    let b = (1.0 - 2.0 * eps).max(0.0);
    let n = n as f64;
    let first = if b > 0.0 { 0.5 * n + 2.0 * b.log2() } else { f64::NEG_INFINITY };
    first.max(b.powi(4) * n - 0.5).max(0.0)
}

/// Converts a protocol wrong with probability `ε` on all but a `δ` fraction
/// of inputs into one wrong with probability `δ + (1−δ)ε` on average.
pub fn eps_prime(eps: f64, delta: f64) -> f64 {
    delta + (1.0 - delta) * eps
}

/// `q ≳ n/d` for circuits of depth `d`.
pub fn depth_tradeoff(n: f64, d: f64) -> f64 {
    n / d
}

/// [`depth_tradeoff`] at `d = log₂ n`.
pub fn depth_tradeoff_log(n: f64) -> f64 {
    depth_tradeoff(n, n.log2())
}

/// `Ω(√n)` with an unknown constant: only the scaling is meaningful.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicBound {
    /// Multiplies the unknown constant `c`.
    pub coefficient: f64,
    pub constant: String,
    pub caveat: String,
}

pub fn disj_bound(n: usize) -> SymbolicBound {
    SymbolicBound {
        coefficient: (n as f64).sqrt(),
        constant: "c".into(),
        caveat: "order of growth only; the constant is unspecified, so no inequality is checked".into(),
    }
}

/// `SMP* ≥ one-way ≥ two-way`.
pub fn chain_audit(smp_cost: f64, oneway_cost: f64, twoway_cost: f64) -> bool {
    smp_cost >= oneway_cost && oneway_cost >= twoway_cost
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFunction {
    Ip,
    Disj,
}

impl std::str::FromStr for BoundFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ip" => Ok(Self::Ip),
            "disj" => Ok(Self::Disj),
            other => Err(Error::InvalidArgument(format!("no bound for function `{other}` (expected ip or disj)"))),
        }
    }
}

/// Resources of an attack as the reduction charges them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostProfile {
    pub q: usize,
    pub c_g: usize,
    pub c_m: usize,
    /// Bits naming a gate; 2 for the canonical four-gate set.
    pub bits_per_choice: usize,
}

impl CostProfile {
    pub fn canonical(q: usize, c_g: usize, c_m: usize) -> Self {
        Self { q, c_g, c_m, bits_per_choice: 2 }
    }

    /// `(2⌈log₂ q⌉ + b)·C_G + (⌈log₂ q⌉ + 1)·C_M`, which for `b = 2` is
    /// `(⌈log₂ q⌉ + 1)(2C_G + C_M)`.
    pub fn message_bound(&self) -> usize {
        let l = ceil_log2(self.q);
        (2 * l + self.bits_per_choice) * self.c_g + (l + 1) * self.c_m
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_g: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits_per_choice: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub parameters: BoundParams,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    /// Inequality audits only; never set from a symbolic bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub satisfied: Option<bool>,
    /// The effective error reached ½, where the bound is vacuous.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn value(name: &str, parameters: BoundParams, value: f64, degenerate: bool) -> Self {
        Self { name: name.into(), parameters, value, lhs: None, rhs: None, satisfied: None, degenerate, note: None }
    }
}

pub fn cleve_report(n: usize, eps: f64) -> BoundReport {
    BoundReport::value("cleve_ip_bound", BoundParams { n: Some(n), eps: Some(eps), ..Default::default() }, cleve_ip_bound(n, eps), eps >= 0.5)
}

pub fn nayak_report(n: usize, eps: f64) -> BoundReport {
    BoundReport::value("nayak_ip_bound", BoundParams { n: Some(n), eps: Some(eps), ..Default::default() }, nayak_ip_bound(n, eps), eps >= 0.5)
}

pub fn eps_prime_report(eps: f64, delta: f64) -> BoundReport {
    let v = eps_prime(eps, delta);
    BoundReport::value("eps_prime", BoundParams { eps: Some(eps), delta: Some(delta), ..Default::default() }, v, v >= 0.5)
}

pub fn depth_report(n: usize, d: f64) -> BoundReport {
    BoundReport::value("depth_tradeoff", BoundParams { n: Some(n), d: Some(d), ..Default::default() }, depth_tradeoff(n as f64, d), false)
}

pub fn disj_report(n: usize) -> BoundReport {
    let b = disj_bound(n);
    let mut r = BoundReport::value("disj_bound", BoundParams { n: Some(n), ..Default::default() }, b.coefficient, false);
    r.note = Some(format!("{}·{}: {}", b.coefficient, b.constant, b.caveat));
    r
}

/// Error fed to the communication bound: the referee's per-input failure
/// `ε/ε₀` from Markov's inequality, then averaged over the `δ` fraction of
/// bad inputs.
pub fn audit_error(eps: f64, delta: f64, eps0: f64) -> f64 {
    eps_prime(eps / eps0, delta)
}

/// Checks that an attack's message bound is at least the SMP* lower bound
/// at the error the reduction delivers.
pub fn main_theorem_audit(profile: CostProfile, n: usize, eps: f64, delta: f64, eps0: f64, function: BoundFunction) -> BoundReport {
    let lhs = profile.message_bound() as f64;
    let e = audit_error(eps, delta, eps0);
    let parameters = BoundParams {
        n: Some(n),
        eps: Some(eps),
        delta: Some(delta),
        eps0: Some(eps0),
        q: Some(profile.q),
        c_g: Some(profile.c_g),
        c_m: Some(profile.c_m),
        bits_per_choice: Some(profile.bits_per_choice),
        d: None,
    };
    match function {
        BoundFunction::Ip => {
            let rhs = nayak_ip_bound(n, e.min(0.5));
            BoundReport {
                name: "main_theorem_audit".into(),
                parameters,
                value: lhs - rhs,
                lhs: Some(lhs),
                rhs: Some(rhs),
                satisfied: Some(lhs >= rhs),
                degenerate: e >= 0.5,
                note: Some(format!("bound evaluated at eps' = {e}")),
            }
        }
        BoundFunction::Disj => {
            let b = disj_bound(n);
            BoundReport {
                name: "main_theorem_audit".into(),
                parameters,
                value: lhs,
                lhs: Some(lhs),
                rhs: None,
                satisfied: None,
                degenerate: e >= 0.5,
                note: Some(format!("right-hand side {}·{} is symbolic; {}", b.coefficient, b.constant, b.caveat)),
            }
        }
    }
}

/// One row of the `(n, ε)` sweep table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub cleve: f64,
    pub nayak: f64,
    pub nayak_ge_cleve: bool,
}

/// The grid `ε ∈ {0, 0.05, …, 0.45}`.
pub fn eps_grid() -> Vec<f64> {
    (0..10).map(|k| k as f64 * 0.05).collect()
}

pub fn sweep(ns: impl IntoIterator<Item = usize>, eps: &[f64]) -> Vec<SweepRow> {
    let mut out = Vec::new();
    for n in ns {
        for &e in eps {
            let (c, k) = (cleve_ip_bound(n, e), nayak_ip_bound(n, e));
            out.push(SweepRow { n, eps: e, cleve: c, nayak: k, nayak_ge_cleve: k >= c });
        }
    }
    out
}
