use serde::{Deserialize, Serialize};

use crate::qcore::channel::{hadamard, pauli_x, pauli_y, pauli_z};
use crate::qcore::linalg::{self, c, CMatrix, ZERO};
use crate::{Error, Result};

/// Unitarity tolerance for gate matrices.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Gate {
    pub name: String,
    pub arity: usize,
    pub matrix: CMatrix,
}

/// Names understood by [`library_gate`].
pub const LIBRARY: &[&str] = &["I", "X", "Y", "Z", "H", "S", "SDG", "T", "TDG", "CNOT", "CZ", "SWAP"];

/// Default first-round gate set, in encoding order.
pub const CANONICAL: &[&str] = &["T", "X", "Z", "CNOT"];

pub fn library_gate(name: &str) -> Option<Gate> {
    let phase = |theta: f64| {
        CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, c(theta.cos(), theta.sin())])
    };
    let pi4 = std::f64::consts::FRAC_PI_4;
    let pi2 = std::f64::consts::FRAC_PI_2;
    let (arity, matrix) = match name {
        "I" => (1, linalg::identity(2)),
        "X" => (1, pauli_x()),
        "Y" => (1, pauli_y()),
        "Z" => (1, pauli_z()),
        "H" => (1, hadamard()),
        "S" => (1, phase(pi2)),
        "SDG" => (1, phase(-pi2)),
        "T" => (1, phase(pi4)),
        "TDG" => (1, phase(-pi4)),
        "CNOT" => (2, linalg::real_matrix(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0.])),
        "CZ" => (2, linalg::real_matrix(4, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1., 0., 0., 0., 0., -1.])),
        "SWAP" => (2, linalg::real_matrix(4, 4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.])),
        _ => return None,
    };
    Some(Gate { name: name.to_string(), arity, matrix })
}

/// Gate entry of a custom set: a library name or an explicit matrix
/// (row-major `[re, im]` pairs).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateDef {
    Named(String),
    Explicit { name: String, arity: usize, matrix: Vec<Vec<[f64; 2]>> },
}

/// Serialized form: `"canonical"`, `"library"`, or a list of [`GateDef`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GateSetSpec {
    Named(String),
    Custom(Vec<GateDef>),
}

/// Ordered generators; a gate is identified by its index.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GateSetSpec", into = "GateSetSpec")]
pub struct GateSet {
    spec: GateSetSpec,
    gates: Vec<Gate>,
}

impl GateSet {
    pub fn canonical() -> Self {
        Self::from_spec(GateSetSpec::Named("canonical".into())).expect("canonical set is valid")
    }

    /// Every library gate; used for uncounted second-round operations.
    pub fn library() -> Self {
        Self::from_spec(GateSetSpec::Named("library".into())).expect("library set is valid")
    }

    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        Self::from_spec(GateSetSpec::Custom(names.iter().map(|n| GateDef::Named(n.as_ref().to_string())).collect()))
    }

    pub fn from_spec(spec: GateSetSpec) -> Result<Self> {
        let named = |names: &[&str]| -> Vec<GateDef> { names.iter().map(|n| GateDef::Named(n.to_string())).collect() };
        let defs = match &spec {
            GateSetSpec::Named(n) if n == "canonical" => named(CANONICAL),
            GateSetSpec::Named(n) if n == "library" => named(LIBRARY),
            GateSetSpec::Named(n) => return Err(Error::MalformedCircuit(format!("unknown gate set `{n}`"))),
            GateSetSpec::Custom(defs) => defs.clone(),
        };
        if defs.is_empty() {
            return Err(Error::MalformedCircuit("empty gate set".into()));
        }
        let mut gates: Vec<Gate> = Vec::with_capacity(defs.len());
        for def in defs {
            let gate = match def {
                GateDef::Named(n) => library_gate(&n).ok_or_else(|| Error::MalformedCircuit(format!("unknown gate `{n}`")))?,
                GateDef::Explicit { name, arity, matrix } => {
                    let d = 1usize << arity;
                    if matrix.len() != d || matrix.iter().any(|r| r.len() != d) {
                        return Err(Error::MalformedCircuit(format!("gate `{name}` needs a {d}x{d} matrix")));
                    }
                    let m = CMatrix::from_fn(d, d, |i, j| c(matrix[i][j][0], matrix[i][j][1]));
                    Gate { name, arity, matrix: m }
                }
            };
            let err = linalg::unitarity_error(&gate.matrix);
            if err > UNITARY_TOL {
                return Err(Error::MalformedCircuit(format!("gate `{}` is not unitary (error {err:e})", gate.name)));
            }
            if gates.iter().any(|g| g.name == gate.name) {
                return Err(Error::MalformedCircuit(format!("gate `{}` listed twice", gate.name)));
            }
            gates.push(gate);
        }
        Ok(Self { spec, gates })
    }

    pub fn spec(&self) -> &GateSetSpec {
        &self.spec
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gate(&self, index: usize) -> Result<&Gate> {
        self.gates
            .get(index)
            .ok_or_else(|| Error::MalformedCircuit(format!("gate index {index} outside a set of {}", self.gates.len())))
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.gates
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| Error::MalformedCircuit(format!("gate `{name}` not in the gate set")))
    }

    /// `⌈log₂ |generators|⌉`.
    pub fn bits_per_choice(&self) -> usize {
        ceil_log2(self.gates.len())
    }

    pub fn max_arity(&self) -> usize {
        self.gates.iter().map(|g| g.arity).max().unwrap_or(0)
    }
}

impl TryFrom<GateSetSpec> for GateSet {
    type Error = Error;
    fn try_from(spec: GateSetSpec) -> Result<Self> {
        Self::from_spec(spec)
    }
}

impl From<GateSet> for GateSetSpec {
    fn from(gs: GateSet) -> Self {
        gs.spec
    }
}

impl PartialEq for GateSet {
    fn eq(&self, other: &Self) -> bool {
        self.gates.len() == other.gates.len()
            && self.gates.iter().zip(&other.gates).all(|(a, b)| {
                a.name == b.name && a.arity == b.arity && linalg::max_abs_diff(&a.matrix, &b.matrix) == 0.0
            })
    }
}

/// `⌈log₂ n⌉` with `⌈log₂ 1⌉ = 0`.
pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_choice_bits() {
        let gs = GateSet::canonical();
        let names: Vec<&str> = gs.gates().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["T", "X", "Z", "CNOT"]);
        assert_eq!(gs.bits_per_choice(), 2);
        assert_eq!(GateSet::from_names(&["CNOT", "H"]).unwrap().bits_per_choice(), 1);
        assert_eq!(GateSet::library().bits_per_choice(), 4);
    }

    #[test]
    fn ceil_log2_values() {
        let oracle = |n: usize| (n as f64).log2().ceil() as usize;
        for n in 1..=1000 {
            assert_eq!(ceil_log2(n), oracle(n), "n = {n}");
        }
    }

    #[test]
    fn library_gates_are_unitary() {
        for name in LIBRARY {
            let g = library_gate(name).unwrap();
            assert!(linalg::unitarity_error(&g.matrix) < 1e-12);
            assert_eq!(g.matrix.nrows(), 1 << g.arity);
        }
    }

    #[test]
    fn t_squared_is_s() {
        let t = library_gate("T").unwrap().matrix;
        let s = library_gate("S").unwrap().matrix;
        assert!(linalg::max_abs_diff(&(&t * &t), &s) < 1e-15);
    }

    #[test]
    fn explicit_gates_validated() {
        let bad = GateSetSpec::Custom(vec![GateDef::Explicit {
            name: "B".into(),
            arity: 1,
            matrix: vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]],
        }]);
        assert!(GateSet::from_spec(bad).is_err());
        let json = serde_json::to_string(&GateSet::canonical()).unwrap();
        assert_eq!(json, "\"canonical\"");
        let back: GateSet = serde_json::from_str("[\"H\", \"CNOT\"]").unwrap();
        assert_eq!(back.len(), 2);
    }
}
