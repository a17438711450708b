//! Subsets of the point set `{0, .., n-1}` as 64-bit masks.

use std::fmt;

/// Largest point count addressable by a [`Subset`] mask.
pub const MAX_POINTS: usize = 64;

/// A subset of point indices, bit `i` set iff point `i` belongs to it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < MAX_POINTS);
        Subset(1u64 << i)
    }

    /// The whole ground set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= MAX_POINTS);
        if n == MAX_POINTS {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(points: I) -> Self {
        Subset(points.into_iter().fold(0u64, |m, i| m | (1u64 << i)))
    }

    #[inline]
    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_POINTS && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn with(self, i: usize) -> Self {
        Subset(self.0 | 1u64 << i)
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        Subset(self.0 & !(1u64 << i))
    }

    #[inline]
    pub fn union(self, other: Subset) -> Self {
        Subset(self.0 | other.0)
    }

    #[inline]
    pub fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    #[inline]
    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Smallest member, if any.
    pub fn first(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    /// Largest member index plus one (0 for the empty set).
    pub fn span(self) -> usize {
        MAX_POINTS - self.0.leading_zeros() as usize
    }

    /// Members in increasing order.
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// All subsets of `self`, in increasing mask order, empty set included.
    pub fn subsets(self) -> Submasks {
        Submasks {
            of: self.0,
            next: Some(0),
        }
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Formats with 1-based point numbers, e.g. `{1,2}`.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

impl FromIterator<usize> for Subset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Subset::from_points(iter)
    }
}

#[derive(Clone, Debug)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let k = self.0.count_ones() as usize;
        (k, Some(k))
    }
}

impl ExactSizeIterator for Members {}

#[derive(Clone, Debug)]
pub struct Submasks {
    of: u64,
    next: Option<u64>,
}

impl Iterator for Submasks {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.next?;
        self.next = if cur == self.of {
            None
        } else {
            // next submask in increasing order
            Some((cur.wrapping_sub(self.of)) & self.of)
        };
        Some(Subset(cur))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn members_and_display() {
        let s = Subset::from_points([0, 2, 5]);
        assert_eq!(s.to_vec(), vec![0, 2, 5]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_string(), "{1,3,6}");
        assert_eq!(s.span(), 6);
        assert_eq!(Subset::EMPTY.span(), 0);
    }

    #[test]
    fn submasks_enumerate_in_order() {
        let s = Subset(0b1011);
        let subs: Vec<u64> = s.subsets().map(Subset::mask).collect();
        assert_eq!(subs, vec![0, 1, 2, 3, 8, 9, 10, 11]);
        assert_eq!(Subset::EMPTY.subsets().count(), 1);
        assert_eq!(Subset::full(64).first(), Some(0));
    }
}
