//! Bitmask subsets of a small ground set (players or goods).

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest ground set representable by [`ItemSet`].
pub const MAX_ITEMS: usize = 32;

/// A subset of `{0, .., 31}` stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemSet(pub u32);

/// A set of players.
pub type Coalition = ItemSet;
/// A set of goods.
pub type Bundle = ItemSet;

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ITEMS, "ground set of {n} items exceeds {MAX_ITEMS}");
        if n == MAX_ITEMS {
            ItemSet(u32::MAX)
        } else {
            ItemSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        assert!(i < MAX_ITEMS);
        ItemSet(1 << i)
    }

    pub fn from_items<I: IntoIterator<Item = usize>>(items: I) -> Self {
        items
            .into_iter()
            .fold(ItemSet::EMPTY, |acc, i| acc.with(i))
    }

    pub fn with(self, i: usize) -> Self {
        assert!(i < MAX_ITEMS);
        ItemSet(self.0 | (1 << i))
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_ITEMS && self.0 & (1 << i) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: ItemSet) -> Self {
        ItemSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ItemSet) -> Self {
        ItemSet(self.0 & other.0)
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_ITEMS).filter(move |i| bits & (1 << i) != 0)
    }

    pub fn bits(self) -> usize {
        self.0 as usize
    }

    /// Highest member index + 1; 0 for the empty set.
    pub fn span(self) -> usize {
        (u32::BITS - self.0.leading_zeros()) as usize
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.items()).finish()
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.items().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Every non-empty subset of an `n`-element ground set, by increasing bitmask.
pub fn nonempty_subsets(n: usize) -> impl Iterator<Item = ItemSet> {
    assert!(n < MAX_ITEMS);
    (1u32..(1u32 << n)).map(ItemSet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_algebra() {
        let s = ItemSet::from_items([0, 2]);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert_eq!(s.len(), 2);
        assert!(s.is_subset_of(ItemSet::full(3)));
        assert_eq!(s.items().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.to_string(), "{0,2}");
        assert_eq!(s.span(), 3);
        assert_eq!(nonempty_subsets(3).count(), 7);
    }
}
