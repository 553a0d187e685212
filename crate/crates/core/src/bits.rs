//! A 64-element bitset used for menus and contract systems.
//!
//! Every ground set in this crate is small (exhaustive scans are capped well
//! below 64 elements), so a single machine word is enough and makes subset
//! enumeration trivial.

use std::fmt;

/// Maximum number of elements a [`Mask`] can address.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mask(pub u64);

impl Mask {
    pub const EMPTY: Mask = Mask(0);

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Mask {
        debug_assert!(n <= MAX_ELEMENTS);
        if n == MAX_ELEMENTS {
            Mask(u64::MAX)
        } else {
            Mask((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Mask {
        Mask(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Mask {
        it.into_iter().fold(Mask::EMPTY, |m, i| m.with(i))
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Mask {
        Mask(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Mask {
        Mask(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn union(self, other: Mask) -> Mask {
        Mask(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Mask) -> Mask {
        Mask(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Mask) -> Mask {
        Mask(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Mask) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Smallest element, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> MaskIter {
        MaskIter(self.0)
    }

    /// All subsets of `self`, in increasing numeric order (starting with the empty set).
    pub fn subsets(self) -> Subsets {
        Subsets {
            universe: self.0,
            next: Some(0),
        }
    }

    /// Canonical key: increasing cardinality, then lexicographic on the sorted
    /// element list.
    pub fn canonical_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.iter().collect())
    }
}

pub struct MaskIter(u64);

impl Iterator for MaskIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for MaskIter {}

/// Submask enumeration of a fixed universe.
pub struct Subsets {
    universe: u64,
    next: Option<u64>,
}

impl Iterator for Subsets {
    type Item = Mask;

    fn next(&mut self) -> Option<Mask> {
        let cur = self.next?;
        // standard "next submask in increasing order" trick
        let succ = (cur | !self.universe).wrapping_add(1) & self.universe;
        self.next = (succ != 0).then_some(succ);
        Some(Mask(cur))
    }
}

impl FromIterator<usize> for Mask {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Mask::from_indices(iter)
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Sorts masks by [`Mask::canonical_key`].
pub fn sort_canonical(masks: &mut [Mask]) {
    masks.sort_by_cached_key(|m| m.canonical_key());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_cover_universe() {
        let u = Mask::from_indices([1, 3, 4]);
        let subs: Vec<Mask> = u.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset(u)));
        assert_eq!(subs[0], Mask::EMPTY);
        assert_eq!(*subs.last().unwrap(), u);
    }

    #[test]
    fn empty_universe_has_one_subset() {
        assert_eq!(Mask::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn full_word() {
        assert_eq!(Mask::full(64).len(), 64);
        assert_eq!(Mask::full(0), Mask::EMPTY);
    }

    #[test]
    fn canonical_order() {
        let mut v = vec![
            Mask::from_indices([0, 2]),
            Mask::from_indices([1]),
            Mask::from_indices([0, 1]),
            Mask::EMPTY,
        ];
        sort_canonical(&mut v);
        assert_eq!(
            v,
            vec![
                Mask::EMPTY,
                Mask::from_indices([1]),
                Mask::from_indices([0, 1]),
                Mask::from_indices([0, 2]),
            ]
        );
    }
}
