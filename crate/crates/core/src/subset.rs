//! Subsets of a ground set `{0, .., n-1}`.
//!
//! A subset is a packed bitset. Up to 64 elements it is a single inline
//! word (a plain bitmask); larger ground sets spill into extra words. Every
//! oracle in the crate consumes this one type.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::{smallvec, SmallVec};

type Words = SmallVec<[u64; 1]>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    n: usize,
    words: Words,
}

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Subset {
            n,
            words: smallvec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for w in s.words.iter_mut() {
            *w = u64::MAX;
        }
        s.trim();
        s
    }

    /// Builds a subset from a bitmask. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "bitmask subsets need n <= 64 (got {n})");
        let mut s = Subset {
            n,
            words: smallvec![mask],
        };
        s.trim();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = Self::empty(n);
        for u in it {
            s.insert(u);
        }
        s
    }

    fn trim(&mut self) {
        let rem = self.n % 64;
        if rem != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << rem) - 1;
        }
        if self.n == 0 {
            self.words[0] = 0;
        }
    }

    #[inline]
    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// The low 64 elements as a bitmask.
    #[inline]
    pub fn mask(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.words[0]
    }

    #[inline]
    pub fn contains(&self, u: usize) -> bool {
        debug_assert!(u < self.n);
        self.words[u >> 6] >> (u & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, u: usize) {
        assert!(u < self.n, "element {u} outside ground set of size {}", self.n);
        self.words[u >> 6] |= 1 << (u & 63);
    }

    #[inline]
    pub fn remove(&mut self, u: usize) {
        assert!(u < self.n, "element {u} outside ground set of size {}", self.n);
        self.words[u >> 6] &= !(1 << (u & 63));
    }

    pub fn with(&self, u: usize) -> Self {
        let mut s = self.clone();
        s.insert(u);
        s
    }

    pub fn without(&self, u: usize) -> Self {
        let mut s = self.clone();
        s.remove(u);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn complement(&self) -> Self {
        let mut s = Subset {
            n: self.n,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn union(&self, other: &Subset) -> Self {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersection(&self, other: &Subset) -> Self {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &Subset) -> Self {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(i * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Indicator vector `1_S`.
    pub fn indicator(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.n];
        for u in self.iter() {
            v[u] = 1.0;
        }
        v
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Serialized form carries only the element list; the ground size is
/// attached separately by the owning structure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexList(pub Vec<usize>);

/// Iterates all `2^n` subsets as bitmasks in increasing order.
pub fn all_masks(n: usize) -> std::ops::Range<u64> {
    assert!(n < 64);
    0..(1u64 << n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_ops() {
        let mut s = Subset::empty(5);
        assert!(s.is_empty());
        s.insert(1);
        s.insert(4);
        assert_eq!(s.to_vec(), vec![1, 4]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.complement().to_vec(), vec![0, 2, 3]);
        assert_eq!(Subset::full(5).len(), 5);
        assert_eq!(s.mask(), 0b10010);
    }

    #[test]
    fn large_ground_set() {
        let s = Subset::from_indices(130, [0, 63, 64, 129]);
        assert_eq!(s.len(), 4);
        assert_eq!(s.complement().len(), 126);
        assert!(s.contains(129));
        assert_eq!(s.to_vec(), vec![0, 63, 64, 129]);
        assert_eq!(Subset::full(130).len(), 130);
    }

    #[test]
    fn full_64() {
        assert_eq!(Subset::full(64).len(), 64);
        assert_eq!(Subset::full(64).complement().len(), 0);
    }

    proptest! {
        #[test]
        fn complement_involution(n in 1usize..150, seed in any::<u64>()) {
            let idx: Vec<usize> = (0..n).filter(|u| (seed.rotate_left(*u as u32 % 64) ^ (*u as u64)) & 1 == 1).collect();
            let s = Subset::from_indices(n, idx.iter().copied());
            prop_assert_eq!(s.complement().complement(), s.clone());
            prop_assert_eq!(s.len() + s.complement().len(), n);
            prop_assert!(s.is_disjoint(&s.complement()));
            prop_assert_eq!(s.to_vec(), idx);
        }
    }
}
