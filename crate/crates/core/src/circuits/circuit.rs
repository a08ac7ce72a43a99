use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::gateset::GateSet;
use crate::{Error, Result};

/// A classical variable readable by a predicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "var", rename_all = "snake_case")]
pub enum Var {
    X { index: usize },
    Y { index: usize },
    Bit { name: String },
}

/// Pure decision rule over the inputs and earlier measurement outcomes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Predicate {
    Const {
        value: bool,
    },
    X {
        index: usize,
    },
    Y {
        index: usize,
    },
    Bit {
        name: String,
    },
    /// XOR of the listed variables, optionally negated.
    Parity {
        #[serde(default)]
        x: Vec<usize>,
        #[serde(default)]
        y: Vec<usize>,
        #[serde(default)]
        bits: Vec<String>,
        #[serde(default)]
        invert: bool,
    },
    /// Truth table indexed by the listed variables, first variable most significant.
    Table {
        inputs: Vec<Var>,
        table: Vec<bool>,
    },
}

/// Classical data visible while a circuit runs.
#[derive(Clone, Copy, Debug)]
pub struct Classical<'a> {
    pub x: &'a [bool],
    pub y: &'a [bool],
    pub bits: &'a BTreeMap<String, bool>,
}

impl Classical<'_> {
    fn x(&self, i: usize) -> Result<bool> {
        self.x.get(i).copied().ok_or_else(|| Error::MalformedCircuit(format!("x index {i} out of range")))
    }
    fn y(&self, i: usize) -> Result<bool> {
        self.y.get(i).copied().ok_or_else(|| Error::MalformedCircuit(format!("y index {i} out of range")))
    }
    fn bit(&self, name: &str) -> Result<bool> {
        self.bits.get(name).copied().ok_or_else(|| Error::MalformedCircuit(format!("bit `{name}` read before it is set")))
    }
    fn var(&self, v: &Var) -> Result<bool> {
        match v {
            Var::X { index } => self.x(*index),
            Var::Y { index } => self.y(*index),
            Var::Bit { name } => self.bit(name),
        }
    }
}

impl Predicate {
    pub fn parity_of_bits<S: AsRef<str>>(bits: &[S]) -> Self {
        Predicate::Parity { x: vec![], y: vec![], bits: bits.iter().map(|b| b.as_ref().to_string()).collect(), invert: false }
    }

    pub fn eval(&self, ctx: &Classical<'_>) -> Result<bool> {
        Ok(match self {
            Predicate::Const { value } => *value,
            Predicate::X { index } => ctx.x(*index)?,
            Predicate::Y { index } => ctx.y(*index)?,
            Predicate::Bit { name } => ctx.bit(name)?,
            Predicate::Parity { x, y, bits, invert } => {
                let mut acc = *invert;
                for &i in x {
                    acc ^= ctx.x(i)?;
                }
                for &i in y {
                    acc ^= ctx.y(i)?;
                }
                for b in bits {
                    acc ^= ctx.bit(b)?;
                }
                acc
            }
            Predicate::Table { inputs, table } => {
                let mut idx = 0usize;
                for v in inputs {
                    idx = (idx << 1) | ctx.var(v)? as usize;
                }
                *table.get(idx).ok_or_else(|| Error::MalformedCircuit("truth table too short".into()))?
            }
        })
    }

    fn vars(&self) -> Vec<Var> {
        match self {
            Predicate::Const { .. } => vec![],
            Predicate::X { index } => vec![Var::X { index: *index }],
            Predicate::Y { index } => vec![Var::Y { index: *index }],
            Predicate::Bit { name } => vec![Var::Bit { name: name.clone() }],
            Predicate::Parity { x, y, bits, .. } => x
                .iter()
                .map(|&i| Var::X { index: i })
                .chain(y.iter().map(|&i| Var::Y { index: i }))
                .chain(bits.iter().map(|b| Var::Bit { name: b.clone() }))
                .collect(),
            Predicate::Table { inputs, .. } => inputs.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instruction {
    Gate {
        gate: usize,
        targets: Vec<usize>,
    },
    /// Computational-basis measurement; the qubit stays in the register, projected.
    Measure {
        target: usize,
        bit: String,
    },
    Conditional {
        predicate: Predicate,
        #[serde(rename = "then")]
        then_branch: Vec<Instruction>,
        #[serde(rename = "else", default)]
        else_branch: Vec<Instruction>,
    },
}

/// A circuit over `qubits` local wires with gates drawn from `gateset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubits: usize,
    pub gateset: GateSet,
    pub instructions: Vec<Instruction>,
}

/// What a circuit may read.
#[derive(Clone, Debug, Default)]
pub struct Visibility {
    /// Length of `x` if readable.
    pub x_len: Option<usize>,
    pub y_len: Option<usize>,
    /// Bits set before the circuit starts.
    pub bits: BTreeSet<String>,
}

/// Static facts about a validated circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CircuitSummary {
    /// Bits set on every execution path.
    pub bits_always: BTreeSet<String>,
    /// Every bit name the circuit may set.
    pub bits_any: BTreeSet<String>,
    pub max_gates: usize,
    pub max_measurements: usize,
}

impl Circuit {
    pub fn new(qubits: usize, gateset: GateSet) -> Self {
        Self { qubits, gateset, instructions: Vec::new() }
    }

    pub fn gate(&mut self, name: &str, targets: &[usize]) -> Result<&mut Self> {
        let gate = self.gateset.index_of(name)?;
        self.instructions.push(Instruction::Gate { gate, targets: targets.to_vec() });
        Ok(self)
    }

    pub fn measure(&mut self, target: usize, bit: &str) -> &mut Self {
        self.instructions.push(Instruction::Measure { target, bit: bit.to_string() });
        self
    }

    pub fn conditional(&mut self, predicate: Predicate, then_branch: Vec<Instruction>, else_branch: Vec<Instruction>) -> &mut Self {
        self.instructions.push(Instruction::Conditional { predicate, then_branch, else_branch });
        self
    }

    /// Instruction for gate `name` without pushing it.
    pub fn gate_instruction(&self, name: &str, targets: &[usize]) -> Result<Instruction> {
        Ok(Instruction::Gate { gate: self.gateset.index_of(name)?, targets: targets.to_vec() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Checks targets, arities, bit definitions and visibility. No instruction
    /// may touch a qubit after it has been measured.
    pub fn validate(&self, vis: &Visibility) -> Result<CircuitSummary> {
        let st = PathState { measured: BTreeSet::new(), bits: vis.bits.clone(), gates: 0, measurements: 0 };
        let mut any = BTreeSet::new();
        let ends = self.walk(&self.instructions, st, vis, &mut any)?;
        let mut always: Option<BTreeSet<String>> = None;
        let (mut max_g, mut max_m) = (0, 0);
        for e in &ends {
            max_g = max_g.max(e.gates);
            max_m = max_m.max(e.measurements);
            let new: BTreeSet<String> = e.bits.difference(&vis.bits).cloned().collect();
            always = Some(match always {
                None => new,
                Some(a) => a.intersection(&new).cloned().collect(),
            });
        }
        Ok(CircuitSummary { bits_always: always.unwrap_or_default(), bits_any: any, max_gates: max_g, max_measurements: max_m })
    }

    fn walk(&self, instrs: &[Instruction], mut st: PathState, vis: &Visibility, any: &mut BTreeSet<String>) -> Result<Vec<PathState>> {
        for (k, ins) in instrs.iter().enumerate() {
            match ins {
                Instruction::Gate { gate, targets } => {
                    let g = self.gateset.gate(*gate)?;
                    if targets.len() != g.arity {
                        return Err(Error::MalformedCircuit(format!("gate `{}` takes {} targets, got {}", g.name, g.arity, targets.len())));
                    }
                    for (i, &t) in targets.iter().enumerate() {
                        self.check_target(t)?;
                        if targets[..i].contains(&t) {
                            return Err(Error::MalformedCircuit(format!("gate `{}` repeats target {t}", g.name)));
                        }
                        if st.measured.contains(&t) {
                            return Err(Error::MalformedCircuit(format!("gate `{}` acts on qubit {t} after it was measured", g.name)));
                        }
                    }
                    st.gates += 1;
                }
                Instruction::Measure { target, bit } => {
                    self.check_target(*target)?;
                    if !st.measured.insert(*target) {
                        return Err(Error::MalformedCircuit(format!("qubit {target} measured twice")));
                    }
                    if !st.bits.insert(bit.clone()) {
                        return Err(Error::MalformedCircuit(format!("bit `{bit}` assigned twice")));
                    }
                    any.insert(bit.clone());
                    st.measurements += 1;
                }
                Instruction::Conditional { predicate, then_branch, else_branch } => {
                    for v in predicate.vars() {
                        match v {
                            Var::X { index } => match vis.x_len {
                                Some(n) if index < n => {}
                                Some(n) => return Err(Error::MalformedCircuit(format!("x index {index} out of range {n}"))),
                                None => return Err(Error::MalformedCircuit("predicate reads x, which is not visible here".into())),
                            },
                            Var::Y { index } => match vis.y_len {
                                Some(n) if index < n => {}
                                Some(n) => return Err(Error::MalformedCircuit(format!("y index {index} out of range {n}"))),
                                None => return Err(Error::MalformedCircuit("predicate reads y, which is not visible here".into())),
                            },
                            Var::Bit { name } => {
                                if !st.bits.contains(&name) {
                                    return Err(Error::MalformedCircuit(format!("bit `{name}` read before it is set")));
                                }
                            }
                        }
                    }
                    if let Predicate::Table { inputs, table } = predicate {
                        if table.len() != 1usize << inputs.len() {
                            return Err(Error::MalformedCircuit(format!(
                                "truth table over {} inputs needs {} entries, has {}",
                                inputs.len(),
                                1usize << inputs.len(),
                                table.len()
                            )));
                        }
                    }
                    let rest = &instrs[k + 1..];
                    let mut out = Vec::new();
                    for branch in [then_branch, else_branch] {
                        for end in self.walk(branch, st.clone(), vis, any)? {
                            out.extend(self.walk(rest, end, vis, any)?);
                        }
                    }
                    return Ok(out);
                }
            }
        }
        Ok(vec![st])
    }

    fn check_target(&self, t: usize) -> Result<()> {
        if t >= self.qubits {
            return Err(Error::MalformedCircuit(format!("target {t} outside a register of {} qubits", self.qubits)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct PathState {
    measured: BTreeSet<usize>,
    bits: BTreeSet<String>,
    gates: usize,
    measurements: usize,
}
