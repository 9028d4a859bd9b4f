//! Sets of item indices over a fixed ground set `0..n`.

use std::fmt;

use crate::error::{Error, Result};

/// A subset of the ground set `0..n`, stored as a bitset.
///
/// Ordering compares the universe size first and then the members as a
/// little-endian integer, so for equal `n` the order is the numeric order of
/// the membership mask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ItemSet {
    n: usize,
    words: Vec<u64>,
}

impl ItemSet {
    pub fn empty(n: usize) -> Self {
        ItemSet {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = ItemSet::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    /// Builds a set from indices; fails if any index is `>= n`.
    pub fn from_items(n: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = ItemSet::empty(n);
        for i in items {
            if i >= n {
                return Err(Error::Domain(format!(
                    "item index {i} out of range for ground set of size {n}"
                )));
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Set with membership given by the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64 || mask == 0);
        let mut s = ItemSet::empty(n);
        if n > 0 {
            s.words[0] = if n >= 64 { mask } else { mask & ((1u64 << n) - 1) };
        }
        s
    }

    /// Membership mask; only valid for ground sets of at most 64 items.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.n <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.n, "item {i} out of range {}", self.n);
        let had = self.contains(i);
        self.words[i / 64] |= 1 << (i % 64);
        !had
    }

    pub fn remove(&mut self, i: usize) -> bool {
        if !self.contains(i) {
            return false;
        }
        self.words[i / 64] &= !(1 << (i % 64));
        true
    }

    pub fn with(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.insert(i);
        s
    }

    pub fn without(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.remove(i);
        s
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    fn check_same(&self, other: &ItemSet) {
        assert_eq!(self.n, other.n, "item sets over different ground sets");
    }

    pub fn union(&self, other: &ItemSet) -> ItemSet {
        self.check_same(other);
        ItemSet {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersection(&self, other: &ItemSet) -> ItemSet {
        self.check_same(other);
        ItemSet {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn difference(&self, other: &ItemSet) -> ItemSet {
        self.check_same(other);
        ItemSet {
            n: self.n,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        }
    }

    pub fn is_subset(&self, other: &ItemSet) -> bool {
        self.check_same(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &ItemSet) -> bool {
        self.check_same(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Checks that every member lies in `0..n`; always true for sets built
    /// through this API but used when validating externally supplied sets.
    pub fn check_universe(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::Domain(format!(
                "item set over {} items used with ground set of size {n}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl PartialOrd for ItemSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ItemSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// All subsets of `0..n` as masks, in increasing numeric order.
pub fn all_masks(n: usize) -> impl Iterator<Item = u64> {
    assert!(n < 64);
    0..(1u64 << n)
}
