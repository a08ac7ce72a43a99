//! Garden-hose protocols: matchings on hose ends, water flow, and the
//! inner-product construction.
//!
//! Hose `k` has an Alice end and a Bob end. Alice may connect the tap to one
//! of her ends; each party pairs up some of its own ends. Water leaves the tap,
//! runs through hoses and connections, and exits at the first open end.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::permutation::{perm_a, perm_b, perm_f, Permutation};
use crate::tasks::function::{all_inputs, bit_string, bits_of, Builtin};
use crate::{Error, Result, SCHEMA_VERSION};

pub const MAX_IP_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Alice => Side::Bob,
            Side::Bob => Side::Alice,
        }
    }

    /// Routing side: Alice is 0, Bob is 1.
    pub fn bit(self) -> bool {
        self == Side::Bob
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Alice => "alice",
            Side::Bob => "bob",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HoseEnd {
    pub hose: usize,
    pub side: Side,
}

/// Alice's connections for one value of `x`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceConfig {
    /// Hose whose Alice end is connected to the tap.
    pub tap: Option<usize>,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GardenHoseProtocol {
    pub schema_version: u32,
    pub n: usize,
    pub num_hoses: usize,
    /// Keyed by the bit string of `x`.
    pub alice: BTreeMap<String, AliceConfig>,
    /// Keyed by the bit string of `y`.
    pub bob: BTreeMap<String, Vec<(usize, usize)>>,
}

/// One element of a water path. Connections keep the stored pair order;
/// the tap appears as `first: None`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum FlowStep {
    Connect { side: Side, first: Option<usize>, second: usize },
    Hose { hose: usize, toward: Side },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowResult {
    pub exit_side: Side,
    /// `None` when the tap itself is left open.
    pub exit_end: Option<HoseEnd>,
    pub path: Vec<FlowStep>,
}

impl FlowResult {
    pub fn connections(&self) -> impl Iterator<Item = (Side, Option<usize>, usize)> + '_ {
        self.path.iter().filter_map(|s| match *s {
            FlowStep::Connect { side, first, second } => Some((side, first, second)),
            FlowStep::Hose { .. } => None,
        })
    }

    pub fn hoses(&self) -> impl Iterator<Item = usize> + '_ {
        self.path.iter().filter_map(|s| match *s {
            FlowStep::Hose { hose, .. } => Some(hose),
            FlowStep::Connect { .. } => None,
        })
    }
}

fn check_pairs(pairs: &[(usize, usize)], extra: Option<usize>, num_hoses: usize, who: &str) -> Result<()> {
    let mut used = BTreeSet::new();
    for &h in extra.iter().chain(pairs.iter().flat_map(|(a, b)| [a, b])) {
        if h >= num_hoses {
            return Err(Error::InvalidProtocol(format!("{who} uses hose {h}, only {num_hoses} exist")));
        }
        if !used.insert(h) {
            return Err(Error::InvalidProtocol(format!("{who} connects hose {h} twice")));
        }
    }
    Ok(())
}

impl GardenHoseProtocol {
    pub fn alice_config(&self, x: &[bool]) -> Result<&AliceConfig> {
        self.alice.get(&bit_string(x)).ok_or_else(|| Error::InvalidProtocol(format!("no Alice matching for x = {}", bit_string(x))))
    }

    pub fn bob_pairs(&self, y: &[bool]) -> Result<&[(usize, usize)]> {
        self.bob.get(&bit_string(y)).map(Vec::as_slice).ok_or_else(|| Error::InvalidProtocol(format!("no Bob matching for y = {}", bit_string(y))))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidProtocol("n must be positive".into()));
        }
        for (k, c) in &self.alice {
            check_pairs(&c.pairs, c.tap, self.num_hoses, &format!("Alice on x = {k}"))?;
        }
        for (k, p) in &self.bob {
            check_pairs(p, None, self.num_hoses, &format!("Bob on y = {k}"))?;
        }
        Ok(())
    }

    /// Bell measurements Alice makes on `x`, counting the tap connection.
    pub fn alice_measurements(&self, x: &[bool]) -> Result<usize> {
        let c = self.alice_config(x)?;
        Ok(c.pairs.len() + c.tap.is_some() as usize)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }
}

fn partner_map(pairs: &[(usize, usize)]) -> HashMap<usize, (usize, usize, usize)> {
    let mut m = HashMap::new();
    for &(a, b) in pairs {
        m.insert(a, (b, a, b));
        m.insert(b, (a, a, b));
    }
    m
}

/// Follows the water from the tap. Each hose may be traversed once.
pub fn evaluate_flow(p: &GardenHoseProtocol, x: &[bool], y: &[bool]) -> Result<FlowResult> {
    let alice = p.alice_config(x)?;
    let maps = [partner_map(&alice.pairs), partner_map(p.bob_pairs(y)?)];
    let Some(start) = alice.tap else {
        return Ok(FlowResult { exit_side: Side::Alice, exit_end: None, path: vec![] });
    };
    let mut path = vec![FlowStep::Connect { side: Side::Alice, first: None, second: start }];
    let mut visited = BTreeSet::new();
    let (mut hose, mut entered) = (start, Side::Alice);
    loop {
        if !visited.insert(hose) {
            return Err(Error::FlowCycle(hose));
        }
        let out = entered.other();
        path.push(FlowStep::Hose { hose, toward: out });
        match maps[out.bit() as usize].get(&hose) {
            Some(&(next, first, second)) => {
                path.push(FlowStep::Connect { side: out, first: Some(first), second });
                hose = next;
                entered = out;
            }
            None => return Ok(FlowResult { exit_side: out, exit_end: Some(HoseEnd { hose, side: out }), path }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    /// Every layer connects all six wires.
    Full,
    /// Hoses that no input ever wets are removed.
    Pruned,
}

const WIRES: usize = 6;

/// The inner-product protocol built from blocks `S_i = A^{x_i} B^{y_i} F B^{y_i} A^{x_i}`.
///
/// Layers alternate between the parties. The tap absorbs the first `A`
/// layer; Alice owns `F`; the trailing `A^{x_i}` of block `i` and the leading
/// `A^{x_{i+1}}` are merged into one Alice layer. Layer `j` joins hose set `j`
/// to set `j + 1`, six hoses per set, one per wire. In the final Alice layer
/// the wire mapped to 1 stays open (water exits with Alice) and the wire mapped
/// to 2 is joined to one extra hose whose Bob end is open.
pub fn build_ip_protocol(n: usize, wiring: Wiring) -> Result<GardenHoseProtocol> {
    if n == 0 || n > MAX_IP_N {
        return Err(Error::InvalidArgument(format!("garden-hose IP protocol needs 1 ≤ n ≤ {MAX_IP_N}, got {n}")));
    }
    let layers = 4 * n;
    let extra = WIRES * layers;
    let hose = |set: usize, wire: usize| WIRES * set + wire;
    let a = perm_a();
    let join = |pairs: &mut Vec<(usize, usize)>, j: usize, perm: &Permutation| {
        for w in 0..WIRES {
            pairs.push((hose(j, w), hose(j + 1, perm.apply0(w))));
        }
    };

    let mut alice = BTreeMap::new();
    for xv in 0..1usize << n {
        let x = bits_of(xv, n);
        let mut cfg = AliceConfig { tap: Some(hose(0, a.pow_bit(x[0]).apply0(0))), pairs: vec![] };
        for j in (1..layers).step_by(2) {
            let (block, r) = (j / 4, j % 4);
            if r == 1 {
                join(&mut cfg.pairs, j, &perm_f());
            } else if block + 1 < n {
                join(&mut cfg.pairs, j, &a.pow_bit(x[block] ^ x[block + 1]));
            } else {
                let last = a.pow_bit(x[block]);
                for w in 0..WIRES {
                    if last.apply0(w) == 1 {
                        cfg.pairs.push((hose(j, w), extra));
                    }
                }
            }
        }
        alice.insert(bit_string(&x), cfg);
    }

    let mut bob = BTreeMap::new();
    for yv in 0..1usize << n {
        let y = bits_of(yv, n);
        let mut pairs = vec![];
        for j in (0..layers).step_by(2) {
            join(&mut pairs, j, &perm_b().pow_bit(y[j / 4]));
        }
        bob.insert(bit_string(&y), pairs);
    }

    let p = GardenHoseProtocol { schema_version: SCHEMA_VERSION, n, num_hoses: extra + 1, alice, bob };
    p.validate()?;
    match wiring {
        Wiring::Full => Ok(p),
        Wiring::Pruned => prune(&p),
    }
}

/// Drops hoses that stay dry on every input and renumbers the rest in order.
pub fn prune(p: &GardenHoseProtocol) -> Result<GardenHoseProtocol> {
    let mut wet = BTreeSet::new();
    for (x, y) in all_inputs(p.n) {
        wet.extend(evaluate_flow(p, &x, &y)?.hoses());
    }
    let index: HashMap<usize, usize> = wet.iter().enumerate().map(|(i, &h)| (h, i)).collect();
    let keep = |pairs: &[(usize, usize)]| -> Vec<(usize, usize)> {
        pairs.iter().filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?))).collect()
    };
    let alice = p
        .alice
        .iter()
        .map(|(k, c)| (k.clone(), AliceConfig { tap: c.tap.and_then(|t| index.get(&t).copied()), pairs: keep(&c.pairs) }))
        .collect();
    let bob = p.bob.iter().map(|(k, v)| (k.clone(), keep(v))).collect();
    let out = GardenHoseProtocol { schema_version: p.schema_version, n: p.n, num_hoses: wet.len(), alice, bob };
    out.validate()?;
    Ok(out)
}

/// Resource counts of a protocol, with the figures quoted for the
/// construction alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub n: usize,
    /// EPR pairs (hoses).
    pub q: usize,
    /// Largest number of Bell measurements over all inputs, tap included.
    pub c_m: usize,
    pub c_m_alice: usize,
    pub c_m_bob: usize,
    /// `2 log₂(q) C_M`.
    pub lhs: f64,
    pub bound_satisfied: bool,
    pub quoted_q: usize,
    pub quoted_c_m_low: usize,
    pub quoted_c_m_high: usize,
    /// The bound evaluated at the quoted `q = 12n`, `C_M = 30n`.
    pub quoted_bound_satisfied: bool,
    /// Whether the measured counts agree with any quoted pair.
    pub matches_quoted: bool,
}

pub fn bell_bound_lhs(q: usize, c_m: usize) -> f64 {
    if q == 0 {
        return 0.0;
    }
    2.0 * (q as f64).log2() * c_m as f64
}

pub fn cost_report(p: &GardenHoseProtocol) -> Result<CostReport> {
    if p.num_hoses == 0 {
        return Err(Error::InvalidProtocol("protocol has no hoses".into()));
    }
    p.validate()?;
    let c_m_alice = p.alice.values().map(|c| c.pairs.len() + c.tap.is_some() as usize).max().unwrap_or(0);
    let c_m_bob = p.bob.values().map(Vec::len).max().unwrap_or(0);
    let c_m = c_m_alice + c_m_bob;
    let n = p.n;
    let lhs = bell_bound_lhs(p.num_hoses, c_m);
    let (qq, lo, hi) = (12 * n, 24 * n, 30 * n);
    Ok(CostReport {
        n,
        q: p.num_hoses,
        c_m,
        c_m_alice,
        c_m_bob,
        lhs,
        bound_satisfied: lhs >= n as f64,
        quoted_q: qq,
        quoted_c_m_low: lo,
        quoted_c_m_high: hi,
        quoted_bound_satisfied: bell_bound_lhs(qq, hi) >= n as f64,
        matches_quoted: p.num_hoses == qq && (c_m == lo || c_m == hi),
    })
}

/// Checks every input of an IP protocol; returns the number checked.
pub fn check_ip_exhaustive(p: &GardenHoseProtocol) -> Result<usize> {
    let mut count = 0;
    for (x, y) in all_inputs(p.n) {
        let r = evaluate_flow(p, &x, &y)?;
        if r.exit_side.bit() != Builtin::Ip.eval(&x, &y) {
            return Err(Error::InvalidProtocol(format!("water exits with {} on x = {}, y = {}", r.exit_side.name(), bit_string(&x), bit_string(&y))));
        }
        count += 1;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(tap: Option<usize>, alice: Vec<(usize, usize)>, bob: Vec<(usize, usize)>, hoses: usize) -> GardenHoseProtocol {
        GardenHoseProtocol {
            schema_version: SCHEMA_VERSION,
            n: 1,
            num_hoses: hoses,
            alice: ["0", "1"].iter().map(|k| (k.to_string(), AliceConfig { tap, pairs: alice.clone() })).collect(),
            bob: ["0", "1"].iter().map(|k| (k.to_string(), bob.clone())).collect(),
        }
    }

    #[test]
    fn trivial_flows() {
        let one = single(Some(0), vec![], vec![], 1);
        let r = evaluate_flow(&one, &[false], &[false]).unwrap();
        assert_eq!(r.exit_side, Side::Bob);
        assert_eq!(r.exit_end, Some(HoseEnd { hose: 0, side: Side::Bob }));

        let two = single(Some(0), vec![], vec![(0, 1)], 2);
        let r = evaluate_flow(&two, &[true], &[true]).unwrap();
        assert_eq!(r.exit_side, Side::Alice);
        assert_eq!(r.exit_end, Some(HoseEnd { hose: 1, side: Side::Alice }));
        assert_eq!(r.connections().count(), 2);
        // alternation: connections and hoses interleave
        for w in r.path.windows(2) {
            assert_ne!(std::mem::discriminant(&w[0]), std::mem::discriminant(&w[1]));
        }
    }

    #[test]
    fn malformed_matchings_rejected() {
        let bad = single(Some(0), vec![(0, 1)], vec![], 2);
        assert!(bad.validate().is_err());
        let out_of_range = single(Some(3), vec![], vec![], 2);
        assert!(out_of_range.validate().is_err());
    }

    #[test]
    fn ip_examples() {
        let p1 = build_ip_protocol(1, Wiring::Full).unwrap();
        assert_eq!(evaluate_flow(&p1, &[true], &[true]).unwrap().exit_side, Side::Bob);
        let p2 = build_ip_protocol(2, Wiring::Full).unwrap();
        assert_eq!(evaluate_flow(&p2, &[true, true], &[true, true]).unwrap().exit_side, Side::Alice);
        assert!(build_ip_protocol(0, Wiring::Full).is_err());
    }

    #[test]
    fn ip_exhaustive_both_wirings() {
        for n in 1..=4 {
            for w in [Wiring::Full, Wiring::Pruned] {
                let p = build_ip_protocol(n, w).unwrap();
                assert_eq!(check_ip_exhaustive(&p).unwrap(), 1 << (2 * n));
            }
        }
    }

    #[test]
    fn full_wiring_counts() {
        for n in 1..=4 {
            let p = build_ip_protocol(n, Wiring::Full).unwrap();
            let c = cost_report(&p).unwrap();
            assert_eq!(c.q, 24 * n + 1);
            assert_eq!(c.c_m, 24 * n - 4);
            assert!(c.bound_satisfied);
        }
    }

    #[test]
    fn pruned_wiring_n1_has_twelve_hoses() {
        let p = build_ip_protocol(1, Wiring::Pruned).unwrap();
        let c = cost_report(&p).unwrap();
        assert_eq!(c.q, 12);
        assert_eq!(c.c_m, 9);
        assert!(!c.matches_quoted);
    }

    #[test]
    fn every_hose_traversed_once_and_ends_consumed_in_pairs() {
        let p = build_ip_protocol(3, Wiring::Pruned).unwrap();
        for (x, y) in all_inputs(3) {
            let r = evaluate_flow(&p, &x, &y).unwrap();
            let hoses: Vec<usize> = r.hoses().collect();
            let unique: BTreeSet<usize> = hoses.iter().copied().collect();
            assert_eq!(hoses.len(), unique.len());
            // each connection joins two ends; the tap connection joins one
            assert_eq!(r.connections().count(), hoses.len() - 1 + 1);
        }
    }

    #[test]
    fn quoted_counts_satisfy_bound() {
        let p = build_ip_protocol(1, Wiring::Full).unwrap();
        assert!(cost_report(&p).unwrap().quoted_bound_satisfied);
        assert!(bell_bound_lhs(12, 30) >= 1.0);
        let empty = GardenHoseProtocol { schema_version: 1, n: 1, num_hoses: 0, alice: BTreeMap::new(), bob: BTreeMap::new() };
        assert!(cost_report(&empty).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = build_ip_protocol(2, Wiring::Pruned).unwrap();
        assert_eq!(GardenHoseProtocol::from_json(&p.to_json().unwrap()).unwrap(), p);
    }
}
