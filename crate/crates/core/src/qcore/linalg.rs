//! Small dense linear-algebra helpers shared by the state types.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalues in `[-EIGEN_CLIP, 0)` are clipped to zero; anything lower is an error.
pub const EIGEN_CLIP: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Builds a matrix from real row-major entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| c(x, 0.0)))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entry-wise deviation of `m` from its adjoint.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

pub fn unitarity_error(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    (prod - identity(u.nrows())).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hermitian eigen-decomposition. Eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m.clone());
    }
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

/// Eigenvalues of a positive semidefinite matrix with small negative drift clipped.
pub fn psd_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    eigvalsh(m).into_iter().map(clip_eigenvalue).collect()
}

pub fn clip_eigenvalue(x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -EIGEN_CLIP {
        Ok(0.0)
    } else {
        Err(Error::InvalidState(format!("eigenvalue {x:e} below -{EIGEN_CLIP:e}")))
    }
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let s = c(f(vals[k]), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    for v in eigvalsh(m) {
        clip_eigenvalue(v)?;
    }
    Ok(hermitian_fn(m, |x| x.max(0.0).sqrt()))
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

/// Offsets of every basis index of `targets` (in target order, big-endian),
/// and of every basis index of the remaining positions.
fn local_offsets(dims: &[usize], targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let expand = |positions: &[usize]| -> Vec<usize> {
        let total: usize = positions.iter().map(|&p| dims[p]).product();
        let mut out = Vec::with_capacity(total);
        for k in 0..total {
            let mut rem = k;
            let mut off = 0;
            for &p in positions.iter().rev() {
                off += (rem % dims[p]) * strides[p];
                rem /= dims[p];
            }
            out.push(off);
        }
        out
    };
    let rest: Vec<usize> = (0..n).filter(|p| !targets.contains(p)).collect();
    (expand(targets), expand(&rest))
}

/// In-place `v <- (op ⊗ I) v` where `op` acts on the subsystems at `targets`.
pub fn apply_local_vector(amps: &mut [Complex64], dims: &[usize], targets: &[usize], op: &CMatrix) {
    let (sub, bases) = local_offsets(dims, targets);
    let dt = sub.len();
    debug_assert_eq!(op.nrows(), dt);
    let mut buf = vec![ZERO; dt];
    for &base in &bases {
        for (k, &o) in sub.iter().enumerate() {
            buf[k] = amps[base + o];
        }
        for (r, &o) in sub.iter().enumerate() {
            let mut acc = ZERO;
            for (k, b) in buf.iter().enumerate() {
                acc += op[(r, k)] * b;
            }
            amps[base + o] = acc;
        }
    }
}

/// `rho <- (op ⊗ I) rho (op ⊗ I)†`.
pub fn apply_local_matrix(rho: &mut CMatrix, dims: &[usize], targets: &[usize], op: &CMatrix) {
    let (sub, bases) = local_offsets(dims, targets);
    let d = rho.nrows();
    let dt = sub.len();
    let mut buf = vec![ZERO; dt];
    // left multiplication, column by column
    for j in 0..d {
        let mut col = rho.column_mut(j);
        for &base in &bases {
            for (k, &o) in sub.iter().enumerate() {
                buf[k] = col[base + o];
            }
            for (r, &o) in sub.iter().enumerate() {
                let mut acc = ZERO;
                for (k, b) in buf.iter().enumerate() {
                    acc += op[(r, k)] * b;
                }
                col[base + o] = acc;
            }
        }
    }
    // right multiplication by the adjoint, row by row
    for i in 0..d {
        for &base in &bases {
            for (k, &o) in sub.iter().enumerate() {
                buf[k] = rho[(i, base + o)];
            }
            for (r, &o) in sub.iter().enumerate() {
                let mut acc = ZERO;
                for (k, b) in buf.iter().enumerate() {
                    acc += op[(r, k)].conj() * b;
                }
                rho[(i, base + o)] = acc;
            }
        }
    }
}

/// For a layout with `dims`, lists for every index of the reordered layout
/// (positions taken in `order`) the index in the original layout.
pub fn reorder_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    for k in 0..total {
        let mut rem = k;
        let mut off = 0;
        for &p in order.iter().rev() {
            off += (rem % dims[p]) * strides[p];
            rem /= dims[p];
        }
        map.push(off);
    }
    map
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn outer(v: &CVector) -> CMatrix {
    v * v.adjoint()
}
