use num_complex::Complex64;

use super::channel::ChannelRep;
use super::layout::RegisterLayout;
use super::linalg::{
    self, apply_local_matrix, apply_local_vector, c, clip_eigenvalue, hermiticity_error, reorder_map, CMatrix,
    CVector, ONE, ZERO,
};
use crate::{Error, Result};

pub const NORM_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;

/// Outcomes whose probability falls below this are treated as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-14;

/// A normalized state vector over a labeled register.
#[derive(Clone, Debug)]
pub struct PureState {
    layout: RegisterLayout,
    amps: CVector,
}

impl PureState {
    pub fn new(layout: RegisterLayout, amps: CVector) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for layout {layout} of dimension {}",
                amps.len(),
                layout.total_dim()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { layout, amps })
    }

    pub fn from_unnormalized(layout: RegisterLayout, amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if norm <= f64::MIN_POSITIVE {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(layout, amps / c(norm, 0.0))
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(Error::Dimension(format!("basis index {index} out of range {d}")));
        }
        let mut amps = CVector::zeros(d);
        amps[index] = ONE;
        Ok(Self { layout, amps })
    }

    /// All qubits in `|0>`.
    pub fn zeros<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::basis(RegisterLayout::qubits(labels)?, 0)
    }

    /// `(|00> + |11>)/sqrt(2)` on qubits `a`, `b`.
    pub fn phi_plus(a: &str, b: &str) -> Result<Self> {
        let layout = RegisterLayout::qubits(&[a, b])?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = CVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        Ok(Self { layout, amps })
    }

    pub fn qubit(label: &str, a0: Complex64, a1: Complex64) -> Result<Self> {
        Self::new(RegisterLayout::qubits(&[label])?, CVector::from_vec(vec![a0, a1]))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self.amps.kronecker(&other.amps);
        Ok(Self { layout, amps })
    }

    /// Reorders the tensor factors to follow `labels`, which must name every label.
    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<PureState> {
        if labels.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!("reorder needs all labels of {}", self.layout)));
        }
        let order = self.layout.positions(labels)?;
        let map = reorder_map(self.layout.dims(), &order);
        let amps = CVector::from_iterator(map.len(), map.iter().map(|&i| self.amps[i]));
        Ok(Self { layout: self.layout.select(labels)?, amps })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<PureState> {
        Ok(Self { layout: self.layout.renamed(from, to)?, amps: self.amps.clone() })
    }

    /// `<self|other>` after aligning `other` to this layout.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        let other = align_pure(other, &self.layout)?;
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn apply_unitary<S: AsRef<str>>(&mut self, labels: &[S], u: &CMatrix) -> Result<()> {
        let pos = self.layout.positions(labels)?;
        let dt: usize = pos.iter().map(|&p| self.layout.dims()[p]).product();
        if u.nrows() != dt || u.ncols() != dt {
            return Err(Error::Dimension(format!("operator of size {}x{} on subsystems of dimension {dt}", u.nrows(), u.ncols())));
        }
        apply_local_vector(self.amps.as_mut_slice(), self.layout.dims(), &pos, u);
        Ok(())
    }

    /// Projects `label` onto basis vector `outcome`. The subsystem stays in the
    /// register; the post-state is renormalized and `None` when the outcome is impossible.
    pub fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<PureState>)> {
        let pos = self.layout.position(label)?;
        let dims = self.layout.dims();
        if outcome >= dims[pos] {
            return Err(Error::Dimension(format!("outcome {outcome} for subsystem `{label}` of dimension {}", dims[pos])));
        }
        let stride: usize = dims[pos + 1..].iter().product();
        let mut amps = self.amps.clone();
        let mut p = 0.0;
        for (i, a) in amps.iter_mut().enumerate() {
            if (i / stride) % dims[pos] == outcome {
                p += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        if p <= ZERO_PROBABILITY {
            return Ok((p, None));
        }
        amps /= c(p.sqrt(), 0.0);
        Ok((p, Some(Self { layout: self.layout.clone(), amps })))
    }

    /// Removes `label`, keeping the component where it equals `outcome`.
    /// Exact when the state is a product with that basis vector.
    pub fn split_off(&self, label: &str, outcome: usize) -> Result<PureState> {
        let pos = self.layout.position(label)?;
        let dims = self.layout.dims();
        let stride: usize = dims[pos + 1..].iter().product();
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i / stride) % dims[pos] == outcome)
            .map(|(_, a)| *a)
            .collect();
        let rest = self.layout.complement(&[label])?;
        let layout = self.layout.select(&rest)?;
        Self::from_unnormalized(layout, CVector::from_vec(amps))
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator { layout: self.layout.clone(), matrix: linalg::outer(&self.amps) }
    }

    /// Reduced density operator on `keep` (in that order).
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let keep_pos = self.layout.positions(keep)?;
        let rest: Vec<usize> = (0..self.layout.len()).filter(|p| !keep_pos.contains(p)).collect();
        let dims = self.layout.dims();
        let dk: usize = keep_pos.iter().map(|&p| dims[p]).product();
        let dr: usize = rest.iter().map(|&p| dims[p]).product();
        let order: Vec<usize> = keep_pos.iter().chain(&rest).copied().collect();
        let map = reorder_map(dims, &order);
        let psi = CMatrix::from_fn(dk, dr, |i, r| self.amps[map[i * dr + r]]);
        let matrix = &psi * psi.adjoint();
        Ok(DensityOperator { layout: self.layout.select(keep)?, matrix })
    }
}

fn align_pure(state: &PureState, layout: &RegisterLayout) -> Result<PureState> {
    if state.layout == *layout {
        return Ok(state.clone());
    }
    if !state.layout.same_labels(layout) {
        return Err(Error::LayoutMismatch(format!("{} vs {layout}", state.layout)));
    }
    state.reorder(layout.labels())
}

/// A density operator over a labeled register.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    layout: RegisterLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(layout: RegisterLayout, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_parts(layout, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only the shape; used internally for intermediate operators.
    pub(crate) fn from_parts(layout: RegisterLayout, matrix: CMatrix) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix {}x{} for layout {layout} of dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.matrix);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = linalg::trace(&self.matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        for v in linalg::eigvalsh(&self.matrix) {
            clip_eigenvalue(v)?;
        }
        Ok(())
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: linalg::identity(d) * c(1.0 / d as f64, 0.0) }
    }

    /// Convex combination; all components are aligned to the first layout.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let layout = first.layout.clone();
        let mut matrix = CMatrix::zeros(layout.total_dim(), layout.total_dim());
        for (p, rho) in parts {
            matrix += rho.aligned_to(&layout)?.matrix * c(*p, 0.0);
        }
        Self::new(layout, matrix)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, matrix: self.matrix.kronecker(&other.matrix) })
    }

    /// Eigenvalues with numerical drift clipped.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        linalg::psd_eigenvalues(&self.matrix)
    }

    pub fn reorder<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        if labels.len() != self.layout.len() {
            return Err(Error::LayoutMismatch(format!("reorder needs all labels of {}", self.layout)));
        }
        let order = self.layout.positions(labels)?;
        let map = reorder_map(self.layout.dims(), &order);
        let d = map.len();
        let matrix = CMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(Self { layout: self.layout.select(labels)?, matrix })
    }

    /// Reorders to `layout`, which must hold the same labels.
    pub fn aligned_to(&self, layout: &RegisterLayout) -> Result<Self> {
        if self.layout == *layout {
            return Ok(self.clone());
        }
        if !self.layout.same_labels(layout) {
            return Err(Error::LayoutMismatch(format!("{} vs {layout}", self.layout)));
        }
        self.reorder(layout.labels())
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Self> {
        Ok(Self { layout: self.layout.renamed(from, to)?, matrix: self.matrix.clone() })
    }

    /// Traces out everything except `keep`; the result follows the order of `keep`.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let keep_pos = self.layout.positions(keep)?;
        let rest: Vec<usize> = (0..self.layout.len()).filter(|p| !keep_pos.contains(p)).collect();
        let dims = self.layout.dims();
        let dk: usize = keep_pos.iter().map(|&p| dims[p]).product();
        let dr: usize = rest.iter().map(|&p| dims[p]).product();
        let order: Vec<usize> = keep_pos.iter().chain(&rest).copied().collect();
        let map = reorder_map(dims, &order);
        let matrix = CMatrix::from_fn(dk, dk, |i, j| {
            let mut acc = ZERO;
            for r in 0..dr {
                acc += self.matrix[(map[i * dr + r], map[j * dr + r])];
            }
            acc
        });
        Ok(Self { layout: self.layout.select(keep)?, matrix })
    }

    pub fn apply_unitary<S: AsRef<str>>(&mut self, labels: &[S], u: &CMatrix) -> Result<()> {
        let pos = self.layout.positions(labels)?;
        let dt: usize = pos.iter().map(|&p| self.layout.dims()[p]).product();
        if u.nrows() != dt || u.ncols() != dt {
            return Err(Error::Dimension(format!("operator of size {}x{} on subsystems of dimension {dt}", u.nrows(), u.ncols())));
        }
        apply_local_matrix(&mut self.matrix, self.layout.dims(), &pos, u);
        Ok(())
    }

    pub fn apply_channel(&self, channel: &ChannelRep) -> Result<Self> {
        channel.apply(self)
    }

    /// Projects `label` onto basis vector `outcome`; post-state renormalized.
    pub fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<Self>)> {
        let pos = self.layout.position(label)?;
        let dims = self.layout.dims();
        if outcome >= dims[pos] {
            return Err(Error::Dimension(format!("outcome {outcome} for subsystem `{label}` of dimension {}", dims[pos])));
        }
        let stride: usize = dims[pos + 1..].iter().product();
        let keep = |i: usize| (i / stride) % dims[pos] == outcome;
        let d = self.dim();
        let mut matrix = self.matrix.clone();
        let mut p = 0.0;
        for i in 0..d {
            for j in 0..d {
                if !(keep(i) && keep(j)) {
                    matrix[(i, j)] = ZERO;
                }
            }
            if keep(i) {
                p += self.matrix[(i, i)].re;
            }
        }
        if p <= ZERO_PROBABILITY {
            return Ok((p.max(0.0), None));
        }
        matrix /= c(p, 0.0);
        Ok((p, Some(Self { layout: self.layout.clone(), matrix })))
    }

    /// `<psi|rho|psi>` with `psi` aligned to this layout.
    pub fn overlap_with_pure(&self, psi: &PureState) -> Result<f64> {
        let psi = align_pure(psi, &self.layout)?;
        let v = psi.amplitudes();
        Ok((v.adjoint() * &self.matrix * v)[(0, 0)].re)
    }
}

/// Common operations over the state representations used by the simulator.
pub trait LabeledState: Clone + Send + Sync + std::fmt::Debug {
    fn labels(&self) -> Vec<String>;
    fn apply_unitary(&mut self, labels: &[String], u: &CMatrix) -> Result<()>;
    fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<Self>)>;
    fn reduced(&self, keep: &[String]) -> Result<DensityOperator>;

    fn has_label(&self, label: &str) -> bool {
        self.labels().iter().any(|l| l == label)
    }
}

impl LabeledState for PureState {
    fn labels(&self) -> Vec<String> {
        self.layout.labels().to_vec()
    }
    fn apply_unitary(&mut self, labels: &[String], u: &CMatrix) -> Result<()> {
        PureState::apply_unitary(self, labels, u)
    }
    fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<Self>)> {
        PureState::project(self, label, outcome)
    }
    fn reduced(&self, keep: &[String]) -> Result<DensityOperator> {
        PureState::reduced(self, keep)
    }
}

impl LabeledState for DensityOperator {
    fn labels(&self) -> Vec<String> {
        self.layout.labels().to_vec()
    }
    fn apply_unitary(&mut self, labels: &[String], u: &CMatrix) -> Result<()> {
        DensityOperator::apply_unitary(self, labels, u)
    }
    fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<Self>)> {
        DensityOperator::project(self, label, outcome)
    }
    fn reduced(&self, keep: &[String]) -> Result<DensityOperator> {
        self.partial_trace(keep)
    }
}
