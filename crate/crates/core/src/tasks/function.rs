//! Boolean functions f : {0,1}ⁿ × {0,1}ⁿ → {0,1} stored as explicit truth tables.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAX_TABLE_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Ip,
    /// 1 iff the supports of x and y are disjoint.
    Disj,
    Const0,
    Const1,
    /// Parity of x, ignoring y.
    XOnly,
}

impl Builtin {
    pub fn eval(self, x: &[bool], y: &[bool]) -> bool {
        match self {
            Builtin::Ip => x.iter().zip(y).fold(false, |acc, (&a, &b)| acc ^ (a & b)),
            Builtin::Disj => !x.iter().zip(y).any(|(&a, &b)| a & b),
            Builtin::Const0 => false,
            Builtin::Const1 => true,
            Builtin::XOnly => x.iter().fold(false, |acc, &a| acc ^ a),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Ip => "ip",
            Builtin::Disj => "disj",
            Builtin::Const0 => "const0",
            Builtin::Const1 => "const1",
            Builtin::XOnly => "x_only",
        }
    }
}

impl std::str::FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ip" => Builtin::Ip,
            "disj" => Builtin::Disj,
            "const0" | "zero" => Builtin::Const0,
            "const1" | "one" => Builtin::Const1,
            "x_only" | "xonly" => Builtin::XOnly,
            other => return Err(Error::InvalidArgument(format!("unknown function `{other}`"))),
        })
    }
}

/// Truth table indexed by `(x << n) | y`, with `x[0]` and `y[0]` the most
/// significant bits of their halves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRepr", into = "FunctionRepr")]
pub struct BooleanFunction {
    n: usize,
    builtin: Option<Builtin>,
    table: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct FunctionRepr {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    builtin: Option<Builtin>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<bool>>,
}

impl TryFrom<FunctionRepr> for BooleanFunction {
    type Error = Error;

    fn try_from(r: FunctionRepr) -> Result<Self> {
        match (r.builtin, r.table) {
            (Some(b), None) => BooleanFunction::builtin(b, r.n),
            (None, Some(t)) => BooleanFunction::from_table(r.n, t),
            _ => Err(Error::InvalidArgument("function needs exactly one of `builtin` or `table`".into())),
        }
    }
}

impl From<BooleanFunction> for FunctionRepr {
    fn from(f: BooleanFunction) -> Self {
        match f.builtin {
            Some(b) => FunctionRepr { n: f.n, builtin: Some(b), table: None },
            None => FunctionRepr { n: f.n, builtin: None, table: Some(f.table) },
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_TABLE_N {
        return Err(Error::InvalidArgument(format!("input half-length must be in 1..={MAX_TABLE_N}, got {n}")));
    }
    Ok(())
}

impl BooleanFunction {
    pub fn builtin(b: Builtin, n: usize) -> Result<Self> {
        check_n(n)?;
        let table = all_inputs(n).map(|(x, y)| b.eval(&x, &y)).collect();
        Ok(Self { n, builtin: Some(b), table })
    }

    pub fn ip(n: usize) -> Result<Self> {
        Self::builtin(Builtin::Ip, n)
    }

    pub fn from_table(n: usize, table: Vec<bool>) -> Result<Self> {
        check_n(n)?;
        if table.len() != 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!("truth table for n = {n} needs {} entries, has {}", 1 << (2 * n), table.len())));
        }
        Ok(Self { n, builtin: None, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        self.builtin
    }

    pub fn name(&self) -> String {
        self.builtin.map_or_else(|| "table".to_string(), |b| b.name().to_string())
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, x: &[bool], y: &[bool]) -> Result<bool> {
        if x.len() != self.n || y.len() != self.n {
            return Err(Error::InvalidArgument(format!("inputs must have length {}", self.n)));
        }
        Ok(self.table[input_index(x, y)])
    }

    pub fn inputs(&self) -> impl Iterator<Item = (Vec<bool>, Vec<bool>)> {
        all_inputs(self.n)
    }
}

pub fn bits_of(value: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect()
}

pub fn value_of(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

pub fn input_index(x: &[bool], y: &[bool]) -> usize {
    (value_of(x) << y.len()) | value_of(y)
}

/// All `(x, y)` pairs in lexicographic order.
pub fn all_inputs(n: usize) -> impl Iterator<Item = (Vec<bool>, Vec<bool>)> {
    (0..1usize << (2 * n)).map(move |i| (bits_of(i >> n, n), bits_of(i & ((1 << n) - 1), n)))
}

/// `"0110"` style rendering used for keys and CSV output.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
