use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CglError, Result};

/// Finite subset `I ⊂ Z^d` indexing the trigonometric span
/// `H(I) = span{cos<l,x>, sin<l,x> : l ∈ I}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencySet {
    d: usize,
    freqs: BTreeSet<Vec<i64>>,
}

impl FrequencySet {
    pub fn new<I, V>(d: usize, freqs: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: Into<Vec<i64>>,
    {
        if d == 0 {
            return Err(CglError::InvalidFrequencySet("dimension must be positive".into()));
        }
        let mut set = BTreeSet::new();
        for f in freqs {
            let f = f.into();
            if f.len() != d {
                return Err(CglError::InvalidFrequencySet(format!("{f:?} is not a {d}-vector")));
            }
            set.insert(f);
        }
        Ok(Self { d, freqs: set })
    }

    pub fn empty(d: usize) -> Self {
        Self { d, freqs: BTreeSet::new() }
    }

    /// `{0, e_1, ..., e_d}`.
    pub fn kappa(d: usize) -> Self {
        let mut freqs = BTreeSet::new();
        freqs.insert(vec![0; d]);
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 1;
            freqs.insert(e);
        }
        Self { d, freqs }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<i64>> {
        self.freqs.iter()
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        self.freqs.contains(k)
    }

    /// Whether `k` or `-k` belongs to the set.
    pub fn contains_pm(&self, k: &[i64]) -> bool {
        self.freqs.contains(k) || self.freqs.contains(&negate(k))
    }

    pub fn contains_zero(&self) -> bool {
        self.freqs.contains(&vec![0; self.d])
    }

    pub fn insert(&mut self, k: Vec<i64>) -> bool {
        debug_assert_eq!(k.len(), self.d);
        self.freqs.insert(k)
    }

    /// Canonical representative of `±k`: the zero vector or the sign with positive leading entry.
    pub fn canonical(k: &[i64]) -> Vec<i64> {
        match k.iter().find(|&&x| x != 0) {
            Some(&x) if x < 0 => negate(k),
            _ => k.to_vec(),
        }
    }

    /// One representative per `±` pair.
    pub fn representatives(&self) -> Self {
        Self { d: self.d, freqs: self.freqs.iter().map(|k| Self::canonical(k)).collect() }
    }

    /// Closure under negation.
    pub fn signed(&self) -> Self {
        let mut freqs = self.freqs.clone();
        for k in &self.freqs {
            freqs.insert(negate(k));
        }
        Self { d: self.d, freqs }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self { d: self.d, freqs: self.freqs.union(&other.freqs).cloned().collect() }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.freqs.is_subset(&other.freqs)
    }

    /// Largest `|k_i|` over the set.
    pub fn max_abs(&self) -> i64 {
        self.freqs.iter().flat_map(|k| k.iter().map(|x| x.abs())).max().unwrap_or(0)
    }

    /// Keeps only vectors with all `|k_i| <= bound`.
    pub fn clipped(&self, bound: i64) -> Self {
        Self { d: self.d, freqs: self.freqs.iter().filter(|k| k.iter().all(|x| x.abs() <= bound)).cloned().collect() }
    }

    pub fn as_vecs(&self) -> Vec<Vec<i64>> {
        self.freqs.iter().cloned().collect()
    }
}

pub(crate) fn negate(k: &[i64]) -> Vec<i64> {
    k.iter().map(|x| -x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_representatives() {
        assert_eq!(FrequencySet::canonical(&[0, -1, 2]), vec![0, 1, -2]);
        assert_eq!(FrequencySet::canonical(&[0, 0]), vec![0, 0]);
        let s = FrequencySet::new(1, [[1], [-1], [2]]).unwrap();
        assert_eq!(s.representatives().len(), 2);
        assert_eq!(s.signed().len(), 4);
    }

    #[test]
    fn kappa_contents() {
        let k = FrequencySet::kappa(3);
        assert_eq!(k.len(), 4);
        assert!(k.contains_zero());
        assert!(k.contains(&[0, 0, 1]));
    }

    #[test]
    fn dimension_checked() {
        assert!(FrequencySet::new(2, [vec![1, 2, 3]]).is_err());
    }
}
