//! Conditional min-entropy `H_min(R|B) = −log₂ min{Tr σ : I_R ⊗ σ ≥ ρ_RB}`.
//!
//! The program is solved with a log-det barrier path-following method over
//! Hermitian `σ`. A dual certificate `X ≥ 0, Tr_R X = I_B` is rebuilt from
//! the barrier's central point, so every result carries a verified gap.
//!
//! The maximal overlap of a decoded state with `Φ⁺` is `F² = 2^{−H_min}/d_R`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::qcore::linalg::{self, c, CMatrix, CVector};
use crate::qcore::{DensityOperator, PureState, RegisterLayout};
use crate::{Error, Result};

/// Largest accepted gap between primal and dual values.
pub const GAP_TOL: f64 = 1e-6;
/// Support eigenvalues below this are dropped when compressing a register.
pub const SUPPORT_TOL: f64 = 1e-12;
/// `D·d_B²` beyond which the solver refuses to run.
pub const MAX_SDP_SIZE: usize = 1 << 14;
/// Label of the support-compressed conditioning register.
pub const SUPPORT_LABEL: &str = "support";

/// Newton steps allowed per centering round.
const MAX_NEWTON: usize = 200;

#[derive(Clone, Debug, Serialize)]
pub struct MinEntropyResult {
    pub hmin: f64,
    /// Optimal `σ` (trace `2^{−H_min}`), on the conditioning labels or on the
    /// support register when the input was compressed.
    #[serde(skip)]
    pub optimal_sigma: DensityOperator,
    pub primal: f64,
    pub dual: f64,
    pub duality_gap: f64,
    /// Smallest eigenvalue of `I ⊗ σ − ρ`.
    pub feasibility: f64,
    pub d_r: usize,
    pub newton_steps: usize,
}

impl MinEntropyResult {
    /// `2^{−H_min}`.
    pub fn guessing_value(&self) -> f64 {
        self.primal
    }

    /// Best decoder fidelity with `Φ⁺`, `√(2^{−H_min}/d_R)`.
    pub fn recovery_fidelity(&self) -> f64 {
        (self.primal / self.d_r as f64).clamp(0.0, 1.0).sqrt()
    }

    pub fn purified_distance(&self) -> f64 {
        let f = self.recovery_fidelity();
        (1.0 - f * f).max(0.0).sqrt()
    }
}

/// Orthonormal basis of `d×d` Hermitian matrices under `Re Tr(A B)`.
fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        let mut m = CMatrix::zeros(d, d);
        m[(j, j)] = c(1.0, 0.0);
        out.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut re = CMatrix::zeros(d, d);
            re[(j, k)] = c(s, 0.0);
            re[(k, j)] = c(s, 0.0);
            out.push(re);
            let mut im = CMatrix::zeros(d, d);
            im[(j, k)] = c(0.0, -s);
            im[(k, j)] = c(0.0, s);
            out.push(im);
        }
    }
    out
}

/// `Tr_A` of an operator on `A ⊗ B` with `A` the leading factor.
fn trace_leading(m: &CMatrix, d_a: usize, d_b: usize) -> CMatrix {
    CMatrix::from_fn(d_b, d_b, |i, j| (0..d_a).map(|a| m[(a * d_b + i, a * d_b + j)]).sum())
}

fn re_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut t = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(j, i)]);
            t += x.re * y.re - x.im * y.im;
        }
    }
    t
}

/// `(log det S, S⁻¹)` for positive definite `S`, `None` otherwise.
fn logdet_inverse(s: &CMatrix) -> Option<(f64, CMatrix)> {
    let h = linalg::hermitian_part(s);
    let ch = nalgebra::Cholesky::new(h)?;
    let l = ch.l();
    let mut logdet = 0.0;
    for i in 0..l.nrows() {
        let d = l[(i, i)].re;
        if d <= 0.0 {
            return None;
        }
        logdet += 2.0 * d.ln();
    }
    Some((logdet, ch.inverse()))
}

struct SdpSolution {
    primal: f64,
    dual: f64,
    sigma: CMatrix,
    feasibility: f64,
    steps: usize,
}

/// Solves `min Tr σ` subject to `I_{d_a} ⊗ σ ≥ rho` for `rho` on `A ⊗ B`.
fn solve(rho: &CMatrix, d_a: usize, d_b: usize) -> Result<SdpSolution> {
    let dim = d_a * d_b;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(Error::Dimension(format!("operator {}x{} is not {d_a}·{d_b}", rho.nrows(), rho.ncols())));
    }
    if dim * d_b * d_b > MAX_SDP_SIZE {
        return Err(Error::Dimension(format!("min-entropy program with d_R = {d_a}, d_B = {d_b} is too large")));
    }
    let rho = linalg::hermitian_part(rho);
    let basis = hermitian_basis(d_b);
    let lifts: Vec<CMatrix> = basis.iter().map(|b| linalg::kron(&linalg::identity(d_a), b)).collect();
    let np = basis.len();
    let lmax = linalg::eigvalsh(&rho).into_iter().fold(0.0, f64::max);

    let mut sigma = linalg::identity(d_b) * c(lmax + 1.0, 0.0);
    let slack = |s: &CMatrix| linalg::kron(&linalg::identity(d_a), s) - &rho;
    let barrier = |s: &CMatrix, t: f64| -> Option<(f64, CMatrix)> {
        let (ld, z) = logdet_inverse(&slack(s))?;
        Some((t * linalg::trace(s).re - ld, z))
    };

    let mut t = 1.0;
    let mut steps = 0;
    let target = 1e-9;
    'path: loop {
        // Newton's method on the barrier at fixed t.
        let mut inner = 0;
        loop {
            let (val, z) = barrier(&sigma, t).ok_or_else(|| Error::NonConvergence("iterate left the feasible cone".into()))?;
            let ks: Vec<CMatrix> = lifts.iter().map(|l| &z * l).collect();
            let mut g = DVector::<f64>::zeros(np);
            let mut h = DMatrix::<f64>::zeros(np, np);
            for a in 0..np {
                g[a] = t * linalg::trace(&basis[a]).re - linalg::trace(&ks[a]).re;
                for b in a..np {
                    let v = re_trace_product(&ks[a], &ks[b]);
                    h[(a, b)] = v;
                    h[(b, a)] = v;
                }
            }
            let step = match h.clone().cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => h.lu().solve(&(-&g)).ok_or_else(|| Error::NonConvergence("singular Newton system".into()))?,
            };
            let decrement = -g.dot(&step);
            steps += 1;
            inner += 1;
            if decrement / 2.0 < 1e-8 {
                break;
            }
            if inner > MAX_NEWTON {
                // Stalled near the boundary: the duality gap decides whether
                // the current iterate is good enough.
                break 'path;
            }
            let dir = basis.iter().zip(step.iter()).fold(CMatrix::zeros(d_b, d_b), |acc, (b, &s)| acc + b * c(s, 0.0));
            let mut s = 1.0;
            loop {
                let cand = &sigma + &dir * c(s, 0.0);
                if let Some((v, _)) = barrier(&cand, t) {
                    if v <= val - 0.25 * s * decrement {
                        sigma = cand;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-14 {
                    // No representable progress; the iterate is central to precision.
                    break;
                }
            }
            if s < 1e-14 {
                break;
            }
        }
        if dim as f64 / t < target {
            break;
        }
        t *= 8.0;
    }

    let s = slack(&sigma);
    let feasibility = linalg::eigvalsh(&s).into_iter().fold(f64::INFINITY, f64::min);
    let z = logdet_inverse(&s).map(|(_, z)| z).ok_or_else(|| Error::NonConvergence("final iterate infeasible".into()))?;
    let x = linalg::hermitian_part(&(z * c(1.0 / t, 0.0)));
    let n = trace_leading(&x, d_a, d_b);
    let n_isqrt = linalg::hermitian_fn(&n, |v| if v > 0.0 { 1.0 / v.sqrt() } else { 0.0 });
    let lift = linalg::kron(&linalg::identity(d_a), &n_isqrt);
    let x = &lift * x * &lift;
    let dual = re_trace_product(&rho, &x);
    let primal = linalg::trace(&sigma).re;
    Ok(SdpSolution { primal, dual, sigma: linalg::hermitian_part(&sigma), feasibility, steps })
}

fn finish(sol: SdpSolution, d_r: usize, sigma: DensityOperator) -> Result<MinEntropyResult> {
    let gap = sol.primal - sol.dual;
    if gap.abs() > GAP_TOL || sol.feasibility < -1e-8 {
        return Err(Error::NonConvergence(format!("duality gap {gap:e}, feasibility {:e}", sol.feasibility)));
    }
    Ok(MinEntropyResult {
        hmin: -sol.primal.log2(),
        optimal_sigma: sigma,
        primal: sol.primal,
        dual: sol.dual,
        duality_gap: gap.max(0.0),
        feasibility: sol.feasibility,
        d_r,
        newton_steps: sol.steps,
    })
}

/// Orthonormal columns spanning the range of `m` (singular values above tolerance).
fn range_basis(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i].powi(2) > SUPPORT_TOL).collect();
    if keep.is_empty() {
        return CMatrix::from_fn(m.nrows(), 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    CMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// `H_min(r | cond)` of `rho`. The conditioning register is first compressed
/// onto the support of `ρ_cond`, which leaves the value unchanged.
pub fn hmin<S: AsRef<str>>(rho: &DensityOperator, r: &str, cond: &[S]) -> Result<MinEntropyResult> {
    let cond: Vec<String> = cond.iter().map(|s| s.as_ref().to_string()).collect();
    let mut keep = vec![r.to_string()];
    keep.extend(cond.iter().cloned());
    let rc = rho.partial_trace(&keep)?;
    let d_r = rc.layout().dim_of(r)?;
    let d_c = rc.dim() / d_r;
    let m = rc.matrix();
    let rho_c = trace_leading(m, d_r, d_c);
    let (vals, vecs) = linalg::eigh(&rho_c);
    let support: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > SUPPORT_TOL).collect();
    let v = CMatrix::from_fn(d_c, support.len().max(1), |i, j| match support.get(j) {
        Some(&k) => vecs[(i, k)],
        None => c(if i == 0 { 1.0 } else { 0.0 }, 0.0),
    });
    let k = v.ncols();
    let lift = linalg::kron(&linalg::identity(d_r), &v);
    let compressed = lift.adjoint() * m * &lift;
    let sol = solve(&compressed, d_r, k)?;
    let sigma = &v * &sol.sigma * v.adjoint();
    let cond_layout = rc.layout().select(&cond)?;
    let sigma = DensityOperator::from_parts(cond_layout, sigma)?;
    finish(sol, d_r, sigma)
}

/// `H_min(r | cond)` of a pure state, where `cond` may be only part of the
/// state's labels. Both `cond` and its complement are compressed through the
/// Schmidt decomposition, so the program size depends on entanglement rather
/// than register size. Labels of `cond` absent from `psi` are ignored.
pub fn hmin_pure<S: AsRef<str>>(psi: &PureState, r: &str, cond: &[S]) -> Result<MinEntropyResult> {
    let rho = compressed_marginal(psi, r, cond)?;
    hmin(&rho, r, &[SUPPORT_LABEL])
}

/// `ρ_{r, support}` where `support` is the support of `ρ_cond` inside `psi`,
/// zero-padded to a power-of-two dimension.
pub fn compressed_marginal<S: AsRef<str>>(psi: &PureState, r: &str, cond: &[S]) -> Result<DensityOperator> {
    let layout = psi.layout();
    let a: Vec<String> = cond.iter().map(|s| s.as_ref().to_string()).filter(|l| layout.contains(l) && l != r).collect();
    let b = layout.complement(&{
        let mut v = a.clone();
        v.push(r.to_string());
        v
    })?;
    let mut order = vec![r.to_string()];
    order.extend(a.iter().cloned());
    order.extend(b.iter().cloned());
    let psi = psi.reorder(&order)?;
    let d_r = layout.dim_of(r)?;
    let d_a = layout.dim_of_set(&a)?;
    let d_b = layout.dim_of_set(&b)?;
    let amps = psi.amplitudes();
    // Rows index A, columns index (R, B).
    let psi_a = CMatrix::from_fn(d_a, d_r * d_b, |ai, col| {
        let (ri, bi) = (col / d_b, col % d_b);
        amps[(ri * d_a + ai) * d_b + bi]
    });
    let u = range_basis(&psi_a);
    let k = u.ncols().next_power_of_two();
    let reduced = u.adjoint() * &psi_a;
    // Vector over (R, A′) for each B column, then ρ = Φ Φ†.
    let phi = CMatrix::from_fn(d_r * k, d_b, |row, bi| {
        let (ri, ai) = (row / k, row % k);
        if ai < reduced.nrows() {
            reduced[(ai, ri * d_b + bi)]
        } else {
            c(0.0, 0.0)
        }
    });
    let m = &phi * phi.adjoint();
    DensityOperator::from_parts(RegisterLayout::new([(r.to_string(), d_r), (SUPPORT_LABEL.to_string(), k)])?, m)
}

/// Largest `⟨Φ⁺|(id ⊗ Λ)(ρ)|Φ⁺⟩` found by alternating optimization over
/// Stinespring isometries `B → R′E`. Each step replaces the isometry by the
/// polar part of the objective's gradient, which never decreases the
/// (convex) objective. A lower bound on `2^{−H_min}/d_R`; used as an oracle.
pub fn seesaw_recovery<S: AsRef<str>, R: Rng + ?Sized>(rho: &DensityOperator, r: &str, cond: &[S], restarts: usize, rng: &mut R) -> Result<f64> {
    let mut keep = vec![r.to_string()];
    keep.extend(cond.iter().map(|s| s.as_ref().to_string()));
    let rc = rho.partial_trace(&keep)?;
    let d_r = rc.layout().dim_of(r)?;
    let d_b = rc.dim() / d_r;
    let d_e = d_r * d_b;
    let out = d_r * d_e;
    let m = rc.matrix();
    // P = Φ⁺_{RR′} ⊗ I_E on (R, R′, E).
    let p = {
        let mut phi = CVector::zeros(d_r * d_r);
        for i in 0..d_r {
            phi[i * d_r + i] = c(1.0 / (d_r as f64).sqrt(), 0.0);
        }
        linalg::kron(&linalg::outer(&phi), &linalg::identity(d_e))
    };
    let objective = |v: &CMatrix| -> (f64, CMatrix) {
        let w = linalg::kron(&linalg::identity(d_r), v);
        let mw = m * w.adjoint() * &p;
        let val = re_trace_product(&p, &(&w * m * w.adjoint()));
        // Gradient Tr_R(ρ W† P): rows B, columns (R′, E).
        let g = CMatrix::from_fn(d_b, out, |bi, col| (0..d_r).map(|ri| mw[(ri * d_b + bi, ri * out + col)]).sum::<Complex64>());
        (val, g)
    };
    let polar = |g: &CMatrix| -> CMatrix {
        let svd = g.adjoint().svd(true, true);
        svd.u.expect("U") * svd.v_t.expect("V")
    };
    let mut best = 0.0f64;
    for _ in 0..restarts.max(1) {
        let init = crate::qcore::random::haar_unitary(out.max(d_b), rng);
        let mut v = polar(&init.columns(0, d_b).into_owned().adjoint());
        let mut last = -1.0;
        for _ in 0..2000 {
            let (val, g) = objective(&v);
            if (val - last).abs() < 1e-13 {
                last = val;
                break;
            }
            last = val;
            v = polar(&g);
        }
        best = best.max(last);
    }
    Ok(best)
}
