use std::sync::Arc;

use super::layout::RegisterLayout;
use super::linalg::CMatrix;
use super::state::{DensityOperator, LabeledState, PureState};
use crate::{Error, Result};

/// A pure state stored as a tensor product of small dense factors.
///
/// Gates merge the factors they touch; a measured subsystem is split off into
/// its own basis-state factor, so circuits that keep entanglement local stay
/// cheap even when the register is large.
#[derive(Clone, Debug)]
pub struct FactoredState {
    factors: Vec<Arc<PureState>>,
}

impl FactoredState {
    pub fn new(factors: Vec<PureState>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for f in &factors {
            for l in f.layout().labels() {
                if !seen.insert(l.clone()) {
                    return Err(Error::DuplicateLabel(l.clone()));
                }
            }
        }
        Ok(Self { factors: factors.into_iter().map(Arc::new).collect() })
    }

    pub fn factors(&self) -> impl Iterator<Item = &PureState> {
        self.factors.iter().map(|f| f.as_ref())
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Dimension of the largest factor.
    pub fn max_factor_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).max().unwrap_or(1)
    }

    pub fn push(&mut self, factor: PureState) -> Result<()> {
        for l in factor.layout().labels() {
            if self.factor_index(l).is_ok() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        self.factors.push(Arc::new(factor));
        Ok(())
    }

    pub fn factor_index(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.layout().contains(label))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn factor_of(&self, label: &str) -> Result<&PureState> {
        Ok(&self.factors[self.factor_index(label)?])
    }

    /// Merges every factor holding one of `labels` into a single factor and
    /// returns its index.
    pub fn merge<S: AsRef<str>>(&mut self, labels: &[S]) -> Result<usize> {
        let mut idx: Vec<usize> = Vec::new();
        for l in labels {
            let i = self.factor_index(l.as_ref())?;
            if !idx.contains(&i) {
                idx.push(i);
            }
        }
        let Some(&first) = idx.first() else {
            return Err(Error::InvalidArgument("merge of an empty label set".into()));
        };
        if idx.len() == 1 {
            return Ok(first);
        }
        idx.sort_unstable();
        let mut merged = (*self.factors[idx[0]]).clone();
        for &i in &idx[1..] {
            merged = merged.tensor(&self.factors[i])?;
        }
        for &i in idx[1..].iter().rev() {
            self.factors.remove(i);
        }
        self.factors[idx[0]] = Arc::new(merged);
        Ok(idx[0])
    }

    /// Dense state over all labels, in factor order.
    pub fn to_pure(&self) -> Result<PureState> {
        let mut it = self.factors.iter();
        let first = it.next().ok_or_else(|| Error::InvalidState("no factors".into()))?;
        let mut out = (**first).clone();
        for f in it {
            out = out.tensor(f)?;
        }
        Ok(out)
    }

    /// Reduced state on `keep` (in that order). Factors disjoint from `keep` are
    /// traced out exactly since they are uncorrelated with the rest.
    pub fn reduced<S: AsRef<str>>(&self, keep: &[S]) -> Result<DensityOperator> {
        let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
        for l in keep {
            let l = l.as_ref();
            let i = self.factor_index(l)?;
            match groups.iter_mut().find(|(g, _)| *g == i) {
                Some((_, ls)) => {
                    if ls.iter().any(|x| x == l) {
                        return Err(Error::DuplicateLabel(l.to_string()));
                    }
                    ls.push(l.to_string())
                }
                None => groups.push((i, vec![l.to_string()])),
            }
        }
        let Some((i0, ls0)) = groups.first() else {
            return Ok(DensityOperator::from_parts(RegisterLayout::empty(), CMatrix::identity(1, 1))?);
        };
        let mut out = self.factors[*i0].reduced(ls0)?;
        for (i, ls) in &groups[1..] {
            out = out.tensor(&self.factors[*i].reduced(ls)?)?;
        }
        out.reorder(keep)
    }

    /// Labels of the factor that contains `label`, in factor order.
    pub fn correlated_with(&self, label: &str) -> Result<Vec<String>> {
        Ok(self.factor_of(label)?.layout().labels().to_vec())
    }

    /// Compares two product states through the marginals on each other's factors.
    pub fn approx_eq(&self, other: &FactoredState, tol: f64) -> Result<bool> {
        let mut a = self.labels();
        let mut b = other.labels();
        a.sort();
        b.sort();
        if a != b {
            return Ok(false);
        }
        for (x, y) in [(self, other), (other, self)] {
            for f in x.factors() {
                let labels = f.layout().labels();
                let mine = f.density();
                let theirs = y.reduced(labels)?;
                if super::linalg::max_abs_diff(mine.matrix(), theirs.matrix()) > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

impl From<PureState> for FactoredState {
    fn from(p: PureState) -> Self {
        Self { factors: vec![Arc::new(p)] }
    }
}

impl LabeledState for FactoredState {
    fn labels(&self) -> Vec<String> {
        self.factors.iter().flat_map(|f| f.layout().labels().iter().cloned()).collect()
    }

    fn apply_unitary(&mut self, labels: &[String], u: &CMatrix) -> Result<()> {
        let i = self.merge(labels)?;
        Arc::make_mut(&mut self.factors[i]).apply_unitary(labels, u)
    }

    fn project(&self, label: &str, outcome: usize) -> Result<(f64, Option<Self>)> {
        let i = self.factor_index(label)?;
        let factor = &self.factors[i];
        let (p, post) = factor.project(label, outcome)?;
        let Some(post) = post else {
            return Ok((p, None));
        };
        let mut out = self.clone();
        if factor.layout().len() == 1 {
            out.factors[i] = Arc::new(post);
        } else {
            let rest = post.split_off(label, outcome)?;
            let basis = PureState::basis(RegisterLayout::new([(label, factor.layout().dim_of(label)?)])?, outcome)?;
            out.factors[i] = Arc::new(rest);
            out.factors.push(Arc::new(basis));
        }
        Ok((p, Some(out)))
    }

    fn reduced(&self, keep: &[String]) -> Result<DensityOperator> {
        FactoredState::reduced(self, keep)
    }

    fn has_label(&self, label: &str) -> bool {
        self.factor_index(label).is_ok()
    }
}
