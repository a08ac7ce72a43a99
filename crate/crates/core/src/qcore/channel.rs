use super::layout::RegisterLayout;
use super::linalg::{self, c, CMatrix, ZERO};
use super::state::DensityOperator;
use crate::{Error, Result};

/// Completeness tolerance for `Σ K†K = I`.
pub const KRAUS_TOL: f64 = 1e-9;

/// A channel in Kraus form mapping the `input` subsystems to the `output` subsystems.
/// Untouched subsystems pass through unchanged.
#[derive(Clone, Debug)]
pub struct ChannelRep {
    input: RegisterLayout,
    output: RegisterLayout,
    kraus: Vec<CMatrix>,
}

impl ChannelRep {
    pub fn new(input: RegisterLayout, output: RegisterLayout, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let (din, dout) = (input.total_dim(), output.total_dim());
        for k in &kraus {
            if k.nrows() != dout || k.ncols() != din {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator {}x{} for a map {din} -> {dout}",
                    k.nrows(),
                    k.ncols()
                )));
            }
        }
        let ch = Self { input, output, kraus };
        let err = ch.completeness_error();
        if err > KRAUS_TOL {
            return Err(Error::InvalidChannel(format!("Kraus completeness violated by {err:e}")));
        }
        Ok(ch)
    }

    pub fn unitary(layout: RegisterLayout, u: CMatrix) -> Result<Self> {
        Self::new(layout.clone(), layout, vec![u])
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { input: layout.clone(), output: layout, kraus: vec![linalg::identity(d)] }
    }

    /// Discards the given subsystems.
    pub fn trace_out(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(1, d);
                k[(0, i)] = c(1.0, 0.0);
                k
            })
            .collect();
        Self { input: layout, output: RegisterLayout::empty(), kraus }
    }

    /// Qubit depolarizing channel `ρ -> (1-p)ρ + p I/2`.
    pub fn depolarizing(label: &str, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing parameter {p} outside [0,1]")));
        }
        let paulis = [pauli_i(), pauli_x(), pauli_y(), pauli_z()];
        let weights = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        let kraus = paulis.into_iter().zip(weights).map(|(m, w)| m * c(w.sqrt(), 0.0)).collect();
        let l = RegisterLayout::qubits(&[label])?;
        Self::new(l.clone(), l, kraus)
    }

    /// Qubit dephasing channel `ρ -> (1-p)ρ + p ZρZ`.
    pub fn dephasing(label: &str, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("dephasing parameter {p} outside [0,1]")));
        }
        let l = RegisterLayout::qubits(&[label])?;
        Self::new(l.clone(), l, vec![pauli_i() * c((1.0 - p).sqrt(), 0.0), pauli_z() * c(p.sqrt(), 0.0)])
    }

    pub fn input(&self) -> &RegisterLayout {
        &self.input
    }

    pub fn output(&self) -> &RegisterLayout {
        &self.output
    }

    pub fn kraus_operators(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Largest entry of `|Σ K†K - I|`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.input.total_dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        linalg::max_abs_diff(&sum, &linalg::identity(d))
    }

    /// Applies the channel. The output subsystems come first, followed by the
    /// untouched subsystems in their original order.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let layout = rho.layout();
        for (l, d) in self.input.labels().iter().zip(self.input.dims()) {
            if layout.dim_of(l)? != *d {
                return Err(Error::Dimension(format!("channel input `{l}` has dimension {d}")));
            }
        }
        let rest = layout.complement(self.input.labels())?;
        for l in self.output.labels() {
            if rest.contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let order: Vec<String> = self.input.labels().iter().chain(&rest).cloned().collect();
        let aligned = rho.reorder(&order)?;
        let rest_layout = layout.select(&rest)?;
        let dr = rest_layout.total_dim();
        let dout = self.output.total_dim();
        let id_rest = linalg::identity(dr);
        let mut out = CMatrix::from_element(dout * dr, dout * dr, ZERO);
        for k in &self.kraus {
            let big = linalg::kron(k, &id_rest);
            out += &big * aligned.matrix() * big.adjoint();
        }
        DensityOperator::from_parts(self.output.concat(&rest_layout)?, out)
    }
}

pub fn pauli_i() -> CMatrix {
    linalg::identity(2)
}

pub fn pauli_x() -> CMatrix {
    linalg::real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    linalg::real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    linalg::real_matrix(2, 2, &[s, s, s, -s])
}
