use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A set of atom indices of one context (at most 64 atoms).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomSet(u64);

impl AtomSet {
    pub const EMPTY: AtomSet = AtomSet(0);

    pub fn full(k: usize) -> AtomSet {
        assert!(k <= 64, "contexts are limited to 64 atoms");
        if k == 64 {
            AtomSet(u64::MAX)
        } else {
            AtomSet((1u64 << k) - 1)
        }
    }

    pub fn singleton(i: usize) -> AtomSet {
        AtomSet(1u64 << i)
    }

    pub fn from_bits(bits: u64) -> AtomSet {
        AtomSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> AtomSet {
        indices
            .into_iter()
            .fold(AtomSet::EMPTY, |s, i| s.with(i))
    }

    pub fn with(self, i: usize) -> AtomSet {
        AtomSet(self.0 | (1u64 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1u64 << i) != 0
    }

    pub fn union(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AtomSet) -> AtomSet {
        AtomSet(self.0 & other.0)
    }

    /// Complement inside a context with `k` atoms.
    pub fn complement(self, k: usize) -> AtomSet {
        AtomSet(!self.0 & AtomSet::full(k).0)
    }

    pub fn is_subset(self, other: AtomSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |&i| bits & (1u64 << i) != 0)
    }

    /// All subsets of a `k`-atom context.
    pub fn all_subsets(k: usize) -> impl Iterator<Item = AtomSet> {
        assert!(k < 64);
        (0..(1u64 << k)).map(AtomSet)
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl Serialize for AtomSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AtomSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= 64) {
            return Err(serde::de::Error::custom(format!("atom index {bad} out of range")));
        }
        Ok(AtomSet::from_indices(indices))
    }
}
