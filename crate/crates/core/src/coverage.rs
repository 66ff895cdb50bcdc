use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};

/// Set of scenario indices `0..t`, e.g. `S_y = {j : y feasible at j, c_j·y ≤ v}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CoverageSet {
    bits: FixedBitSet,
}

impl CoverageSet {
    pub fn empty(t: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(t),
        }
    }

    pub fn full(t: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(t);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_indices(t: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(t);
        for j in indices {
            s.insert(j);
        }
        s
    }

    /// Width of the universe (the scenario count `t`).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.bits.contains(j)
    }

    pub fn insert(&mut self, j: usize) {
        self.bits.insert(j);
    }

    pub fn remove(&mut self, j: usize) {
        self.bits.set(j, false);
    }

    pub fn union_with(&mut self, other: &CoverageSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &CoverageSet) {
        self.bits.difference_with(&other.bits);
    }

    pub fn is_subset(&self, other: &CoverageSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersection_count(&self, other: &CoverageSet) -> usize {
        self.bits.intersection_count(&other.bits)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    /// Packed form for universes of at most 64 scenarios.
    pub fn to_u64(&self) -> Option<u64> {
        if self.universe() > 64 {
            return None;
        }
        Some(self.bits.ones().fold(0u64, |acc, j| acc | (1u64 << j)))
    }
}

impl fmt::Debug for CoverageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoverageSet({}/{}: {:?})", self.count(), self.universe(), self.indices())
    }
}

impl Serialize for CoverageSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.bits.ones())
    }
}
