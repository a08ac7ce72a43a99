use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AppliedGate {
    pub gate: usize,
    pub targets: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub target: usize,
    pub outcome: bool,
}

/// Record of the gates one party applied and the measurements it made, in
/// execution order. Targets are the circuit's local wire indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transcript {
    pub applied_gates: Vec<AppliedGate>,
    pub measurements: Vec<MeasurementRecord>,
}

impl Transcript {
    /// Measurement outcomes as a `0`/`1` string.
    pub fn outcome_string(&self) -> String {
        self.measurements.iter().map(|m| if m.outcome { '1' } else { '0' }).collect()
    }

    pub fn costs(&self) -> (usize, usize) {
        count_costs(self)
    }
}

/// `(C_G, C_M)`.
pub fn count_costs(t: &Transcript) -> (usize, usize) {
    (t.applied_gates.len(), t.measurements.len())
}

/// One enumerated execution path of a circuit or a sequence of circuits.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// One transcript per stage.
    pub transcripts: Vec<Transcript>,
    pub probability: f64,
    pub bits: BTreeMap<String, bool>,
}

impl Branch {
    pub fn outcome_string(&self) -> String {
        self.transcripts.iter().map(|t| t.outcome_string()).collect::<Vec<_>>().join("|")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_counts() {
        assert_eq!(count_costs(&Transcript::default()), (0, 0));
        let t = Transcript {
            applied_gates: vec![AppliedGate { gate: 0, targets: vec![0] }; 3],
            measurements: vec![MeasurementRecord { target: 1, outcome: true }, MeasurementRecord { target: 0, outcome: false }],
        };
        assert_eq!(t.costs(), (3, 2));
        assert_eq!(t.outcome_string(), "10");
    }
}
