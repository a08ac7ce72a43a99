//! Seeded random states and unitaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::layout::RegisterLayout;
use super::linalg::{c, CMatrix, CVector};
use super::state::{DensityOperator, PureState};
use crate::{Error, Result};

pub type LabRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Haar-random pure state: a normalized standard complex Gaussian vector.
pub fn haar_state<R: Rng + ?Sized>(layout: &RegisterLayout, rng: &mut R) -> PureState {
    let d = layout.total_dim();
    loop {
        let v = CVector::from_fn(d, |_, _| gaussian(rng));
        if let Ok(psi) = PureState::from_unnormalized(layout.clone(), v) {
            return psi;
        }
    }
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix, with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random density operator of rank at most `rank`: `G G† / tr(G G†)` for a
/// `d × rank` Gaussian `G` (the marginal of a Haar state on a larger space).
pub fn random_density<R: Rng + ?Sized>(layout: &RegisterLayout, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be positive".into()));
    }
    let d = layout.total_dim();
    let g = CMatrix::from_fn(d, rank, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = super::linalg::trace(&m).re;
    DensityOperator::new(layout.clone(), m / c(tr, 0.0))
}

/// Uniformly random bit string of length `n`.
pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<bool> {
    (0..n).map(|_| rng.random::<bool>()).collect()
}
