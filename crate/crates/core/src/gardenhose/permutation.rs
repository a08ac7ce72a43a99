//! Permutations of hose wires, written 1-based as in cycle notation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    /// `image[i]` is the 0-based image of 0-based point `i`.
    image: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    /// From a 1-based image list.
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::from_image(v.iter().map(|&i| i.wrapping_sub(1)).collect())
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.image.iter().map(|i| i + 1).collect()
    }
}

impl Permutation {
    pub fn identity(k: usize) -> Self {
        Self { image: (0..k).collect() }
    }

    /// From a 0-based image array.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument(format!("{image:?} is not a bijection")));
            }
        }
        Ok(Self { image })
    }

    /// From disjoint 1-based cycles on `{1..k}`.
    pub fn from_cycles(k: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut image: Vec<usize> = (0..k).collect();
        let mut used = vec![false; k];
        for cyc in cycles {
            for (j, &a) in cyc.iter().enumerate() {
                if a == 0 || a > k || std::mem::replace(&mut used[a - 1], true) {
                    return Err(Error::InvalidArgument(format!("bad cycle {cyc:?} on {k} points")));
                }
                image[a - 1] = cyc[(j + 1) % cyc.len()] - 1;
            }
        }
        Ok(Self { image })
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    /// Image of 1-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1] + 1
    }

    pub(crate) fn apply0(&self, i: usize) -> usize {
        self.image[i]
    }

    /// `p ∘ q`: apply `q` first, then `p`.
    pub fn compose(&self, q: &Permutation) -> Result<Permutation> {
        if self.size() != q.size() {
            return Err(Error::Dimension(format!("composing permutations of sizes {} and {}", self.size(), q.size())));
        }
        Ok(Self { image: q.image.iter().map(|&i| self.image[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut image = vec![0; self.size()];
        for (i, &j) in self.image.iter().enumerate() {
            image[j] = i;
        }
        Self { image }
    }

    /// `self` if `bit`, identity otherwise.
    pub fn pow_bit(&self, bit: bool) -> Permutation {
        if bit {
            self.clone()
        } else {
            Self::identity(self.size())
        }
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn is_involution(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &j)| self.image[j] == i)
    }

    /// Non-trivial cycles, 1-based, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.size()];
        let mut out = Vec::new();
        for s in 0..self.size() {
            if seen[s] || self.image[s] == s {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i + 1);
                i = self.image[i];
            }
            out.push(cyc);
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let parts: Vec<String> = c.iter().map(|i| i.to_string()).collect();
            write!(f, "({})", parts.join(" "))?;
        }
        Ok(())
    }
}

/// `A = (13)(24)`.
pub fn perm_a() -> Permutation {
    Permutation::from_cycles(6, &[&[1, 3], &[2, 4]]).expect("valid cycles")
}

/// `B = (35)(46)`.
pub fn perm_b() -> Permutation {
    Permutation::from_cycles(6, &[&[3, 5], &[4, 6]]).expect("valid cycles")
}

/// `F = (56)`.
pub fn perm_f() -> Permutation {
    Permutation::from_cycles(6, &[&[5, 6]]).expect("valid cycles")
}

/// `S = A^x B^y F B^y A^x`.
pub fn s_block(x: bool, y: bool) -> Permutation {
    let a = perm_a().pow_bit(x);
    let b = perm_b().pow_bit(y);
    [&b, &perm_f(), &b, &a].iter().fold(a.clone(), |acc, p| acc.compose(p).expect("same size"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtins_are_involutions() {
        for p in [perm_a(), perm_b(), perm_f()] {
            assert!(p.is_involution());
            assert!(p.compose(&p).unwrap().is_identity());
        }
    }

    #[test]
    fn s_block_values() {
        assert_eq!(s_block(false, false), perm_f());
        assert_eq!(s_block(true, false), perm_f());
        // conjugating (56) by (35)(46) gives (34)
        assert_eq!(s_block(false, true).to_string(), "(3 4)");
        let s11 = s_block(true, true);
        assert_eq!(s11.apply(1), 2);
        assert_eq!(s11.apply(2), 1);
        assert_eq!(s11.to_string(), "(1 2)");
    }

    #[test]
    fn s_block_acts_on_first_two_wires_by_product() {
        for x in [false, true] {
            for y in [false, true] {
                let s = s_block(x, y);
                let swapped = s.apply(1) == 2;
                assert_eq!(swapped, x && y);
                assert!([1, 2].contains(&s.apply(1)) && [1, 2].contains(&s.apply(2)));
            }
        }
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_image(vec![0, 0]).is_err());
        assert!(Permutation::from_cycles(3, &[&[1, 4]]).is_err());
        assert!(Permutation::try_from(vec![2, 1, 3]).is_ok());
    }

    fn perm(k: usize) -> impl Strategy<Value = Permutation> {
        Just((0..k).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Permutation::from_image(v).unwrap())
    }

    proptest! {
        #[test]
        fn composition_is_associative((p, q, r) in (perm(6), perm(6), perm(6))) {
            let left = p.compose(&q).unwrap().compose(&r).unwrap();
            let right = p.compose(&q.compose(&r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        }
    }
}
