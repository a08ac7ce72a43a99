use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ordered, labeled tensor factors of a register. The first label is the most
/// significant digit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl RegisterLayout {
    pub fn new<S: Into<String>>(entries: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for (label, dim) in entries {
            let label = label.into();
            if !dim.is_power_of_two() {
                return Err(Error::Dimension(format!("subsystem `{label}` has dimension {dim}, not a power of two")));
            }
            if labels.contains(&label) {
                return Err(Error::DuplicateLabel(label));
            }
            labels.push(label);
            dims.push(dim);
        }
        Ok(Self { labels, dims })
    }

    /// Layout of qubits with the given labels.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(labels.iter().map(|l| (l.as_ref().to_string(), 2)))
    }

    pub fn empty() -> Self {
        Self { labels: Vec::new(), dims: Vec::new() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if out.contains(&p) {
                return Err(Error::DuplicateLabel(l.as_ref().to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    /// Product dimension of a subset of labels.
    pub fn dim_of_set<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        Ok(self.positions(labels)?.iter().map(|&p| self.dims[p]).product())
    }

    /// Sub-layout containing `labels` in the given order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let pos = self.positions(labels)?;
        Ok(Self {
            labels: pos.iter().map(|&p| self.labels[p].clone()).collect(),
            dims: pos.iter().map(|&p| self.dims[p]).collect(),
        })
    }

    /// Labels not in `labels`, in layout order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<String>> {
        self.positions(labels)?;
        Ok(self
            .labels
            .iter()
            .filter(|l| !labels.iter().any(|k| k.as_ref() == l.as_str()))
            .cloned()
            .collect())
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.labels
                .iter()
                .cloned()
                .zip(self.dims.iter().copied())
                .chain(other.labels.iter().cloned().zip(other.dims.iter().copied())),
        )
    }

    pub fn renamed(&self, from: &str, to: &str) -> Result<Self> {
        let p = self.position(from)?;
        if from != to && self.contains(to) {
            return Err(Error::DuplicateLabel(to.to_string()));
        }
        let mut out = self.clone();
        out.labels[p] = to.to_string();
        Ok(out)
    }

    /// True when both layouts hold the same labels with the same dimensions,
    /// in any order.
    pub fn same_labels(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .labels
                .iter()
                .zip(&self.dims)
                .all(|(l, d)| other.position(l).map(|p| other.dims[p] == *d).unwrap_or(false))
    }
}

impl std::fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.labels.iter().zip(&self.dims).map(|(l, d)| format!("{l}:{d}")).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_dims() {
        assert!(matches!(RegisterLayout::qubits(&["R", "R"]), Err(Error::DuplicateLabel(_))));
        assert!(matches!(RegisterLayout::new([("A", 3)]), Err(Error::Dimension(_))));
    }

    #[test]
    fn total_dim_is_product() {
        let l = RegisterLayout::new([("R", 2), ("M", 4), ("X", 1)]).unwrap();
        assert_eq!(l.total_dim(), 8);
        assert_eq!(l.complement(&["M"]).unwrap(), vec!["R".to_string(), "X".to_string()]);
        assert!(l.position("Q").is_err());
    }
}
