use std::fmt;

use crate::{Error, Result};

/// A set of coordinate indices, stored as a bitmask.
///
/// The dense-table capacity (10^7 cells with alphabets of size >= 2)
/// bounds the number of coordinates well below the 32-bit width.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CoordSet {
    bits: u32,
}

impl CoordSet {
    pub const MAX_COORDS: usize = 32;

    pub fn empty() -> Self {
        Self { bits: 0 }
    }

    /// The full set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= Self::MAX_COORDS);
        if n == 32 {
            Self { bits: u32::MAX }
        } else {
            Self {
                bits: (1u32 << n) - 1,
            }
        }
    }

    pub fn singleton(i: usize) -> Self {
        debug_assert!(i < Self::MAX_COORDS);
        Self { bits: 1 << i }
    }

    /// Builds a set from indices, validating them against `n` coordinates.
    /// Duplicates are allowed and collapse.
    pub fn from_indices(indices: &[usize], n: usize) -> Result<Self> {
        let mut bits = 0u32;
        for &i in indices {
            if i >= n {
                return Err(Error::BadParameter(format!(
                    "coordinate index {i} out of range for {n} coordinates"
                )));
            }
            bits |= 1 << i;
        }
        Ok(Self { bits })
    }

    /// Set from a raw bitmask; the caller guarantees it fits `n` coordinates.
    pub(crate) fn from_bits(bits: u32) -> Self {
        Self { bits }
    }

    pub(crate) fn bits(self) -> u32 {
        self.bits
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < Self::MAX_COORDS && self.bits & (1 << i) != 0
    }

    pub fn insert(self, i: usize) -> Self {
        debug_assert!(i < Self::MAX_COORDS);
        Self {
            bits: self.bits | (1 << i),
        }
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            bits: self.bits | other.bits,
        }
    }

    pub fn intersect(self, other: Self) -> Self {
        Self {
            bits: self.bits & other.bits,
        }
    }

    pub fn minus(self, other: Self) -> Self {
        Self {
            bits: self.bits & !other.bits,
        }
    }

    pub fn complement(self, n: usize) -> Self {
        Self {
            bits: Self::full(n).bits & !self.bits,
        }
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.bits & other.bits == 0
    }

    /// Ascending iterator over the member indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..Self::MAX_COORDS).filter(move |&i| self.bits & (1 << i) != 0)
    }

    pub fn indices(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `{0,..,n-1}` with `card` elements, in lexicographic
    /// order of their sorted index lists.
    pub fn subsets_of_cardinality(n: usize, card: usize) -> Vec<CoordSet> {
        let mut out = Vec::new();
        let mut current = Vec::with_capacity(card);
        fn rec(n: usize, card: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<CoordSet>) {
            if current.len() == card {
                out.push(CoordSet::from_indices(current, n).expect("indices in range"));
                return;
            }
            for i in start..n {
                if n - i < card - current.len() {
                    break;
                }
                current.push(i);
                rec(n, card, i + 1, current, out);
                current.pop();
            }
        }
        rec(n, card, 0, &mut current, &mut out);
        out
    }
}

impl fmt::Debug for CoordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoordSet{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// 1-based rendering, matching the CLI convention.
impl fmt::Display for CoordSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let s = CoordSet::from_indices(&[0, 2], 4).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert_eq!(s.complement(4).indices(), vec![1, 3]);
        assert!(s.is_subset_of(CoordSet::full(4)));
        assert!(s.is_disjoint(CoordSet::singleton(1)));
        assert_eq!(s.union(CoordSet::singleton(1)).len(), 3);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(CoordSet::from_indices(&[3], 3).is_err());
    }

    #[test]
    fn subset_enumeration_is_lexicographic() {
        let subs = CoordSet::subsets_of_cardinality(4, 2);
        let lists: Vec<Vec<usize>> = subs.iter().map(|s| s.indices()).collect();
        assert_eq!(
            lists,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }
}
