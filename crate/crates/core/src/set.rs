//! Small sorted-set types for attributes and relations.
//!
//! Attribute sets are sorted integer vectors so that iteration order (and
//! therefore every enumeration order built on top of them) is deterministic.
//! Relation sets are u64 bitmasks, which keeps the subset dynamic programming
//! in the oracle cheap.

use std::fmt;

/// A set of attribute ids, kept sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AttrSet(Vec<u32>);

impl AttrSet {
    pub fn new() -> Self {
        AttrSet(Vec::new())
    }

    pub fn singleton(a: u32) -> Self {
        AttrSet(vec![a])
    }

    pub fn from_sorted(v: Vec<u32>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        AttrSet(v)
    }

    pub fn insert(&mut self, a: u32) {
        if let Err(pos) = self.0.binary_search(&a) {
            self.0.insert(pos, a);
        }
    }

    pub fn contains(&self, a: u32) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &AttrSet) -> AttrSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        AttrSet(out)
    }

    pub fn intersect(&self, other: &AttrSet) -> AttrSet {
        AttrSet(
            self.0
                .iter()
                .copied()
                .filter(|a| other.contains(*a))
                .collect(),
        )
    }

    pub fn minus(&self, other: &AttrSet) -> AttrSet {
        AttrSet(
            self.0
                .iter()
                .copied()
                .filter(|a| !other.contains(*a))
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &AttrSet) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }

    pub fn is_strict_subset_of(&self, other: &AttrSet) -> bool {
        self.len() < other.len() && self.is_subset_of(other)
    }

    pub fn intersects(&self, other: &AttrSet) -> bool {
        self.0.iter().any(|a| other.contains(*a))
    }
}

impl FromIterator<u32> for AttrSet {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        AttrSet(v)
    }
}

impl fmt::Debug for AttrSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a)?;
        }
        write!(f, "}}")
    }
}

/// A set of relation ids as a bitmask. Queries are capped at 64 relations.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct RelSet(pub u64);

impl RelSet {
    pub const MAX_RELATIONS: usize = 64;

    pub fn empty() -> Self {
        RelSet(0)
    }

    pub fn singleton(r: u32) -> Self {
        RelSet(1 << r)
    }

    pub fn full(n: usize) -> Self {
        if n == 64 {
            RelSet(u64::MAX)
        } else {
            RelSet((1u64 << n) - 1)
        }
    }

    pub fn insert(&mut self, r: u32) {
        self.0 |= 1 << r;
    }

    pub fn contains(&self, r: u32) -> bool {
        self.0 & (1 << r) != 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn union(&self, other: RelSet) -> RelSet {
        RelSet(self.0 | other.0)
    }

    pub fn intersect(&self, other: RelSet) -> RelSet {
        RelSet(self.0 & other.0)
    }

    pub fn minus(&self, other: RelSet) -> RelSet {
        RelSet(self.0 & !other.0)
    }

    pub fn is_subset_of(&self, other: RelSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let r = bits.trailing_zeros();
                bits &= bits - 1;
                Some(r)
            }
        })
    }

    pub fn min_rel(&self) -> Option<u32> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros())
        }
    }

    /// Iterates all nonempty proper subsets of this set.
    pub fn proper_subsets(&self) -> impl Iterator<Item = RelSet> {
        let full = self.0;
        let mut sub = 0u64;
        let mut done = full == 0;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            sub = sub.wrapping_sub(full) & full;
            if sub == full || sub == 0 {
                done = true;
                return None;
            }
            Some(RelSet(sub))
        })
    }
}

impl fmt::Debug for RelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "R{}", r)?;
        }
        write!(f, "}}")
    }
}
