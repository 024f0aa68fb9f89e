//! Compact color bitmaps carried in Color messages.
//!
//! A bitmap stores one bit per color. Storage grows by doubling as higher
//! colors appear; the wire size reported by [`ColorBitmap::byte_len`] is the
//! trimmed width, so an empty bitmap costs zero bytes.

use serde::{Deserialize, Serialize};

use crate::Color;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColorBitmap {
    words: Vec<u64>,
}

impl ColorBitmap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_colors(colors: impl IntoIterator<Item = Color>) -> Self {
        let mut bm = Self::new();
        for c in colors {
            bm.set(c);
        }
        bm
    }

    pub fn set(&mut self, color: Color) {
        let word = (color / 64) as usize;
        if word >= self.words.len() {
            let mut new_len = self.words.len().max(1);
            while new_len <= word {
                new_len *= 2;
            }
            self.words.resize(new_len, 0);
        }
        self.words[word] |= 1u64 << (color % 64);
    }

    pub fn contains(&self, color: Color) -> bool {
        self.words
            .get((color / 64) as usize)
            .is_some_and(|w| w & (1u64 << (color % 64)) != 0)
    }

    pub fn union_with(&mut self, other: &Self) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Smallest color not present.
    pub fn smallest_unset(&self) -> Color {
        for (i, &w) in self.words.iter().enumerate() {
            if w != u64::MAX {
                return i as Color * 64 + w.trailing_ones();
            }
        }
        self.words.len() as Color * 64
    }

    /// Number of set bits.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Trimmed width in bits: highest set color + 1, or 0 when empty.
    pub fn trimmed_bits(&self) -> usize {
        for (i, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return i * 64 + (64 - w.leading_zeros() as usize);
            }
        }
        0
    }

    /// Wire size in bytes: the trimmed width rounded up to whole bytes.
    pub fn byte_len(&self) -> usize {
        self.trimmed_bits().div_ceil(8)
    }

    pub fn colors(&self) -> impl Iterator<Item = Color> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter_map(move |b| (w & (1u64 << b) != 0).then_some(i as Color * 64 + b))
        })
    }
}

// Serialize as a sorted color list: artifact files stay readable and the
// trailing-zero padding of the word vector never leaks into equality checks.
impl Serialize for ColorBitmap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.colors())
    }
}

impl<'de> Deserialize<'de> for ColorBitmap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let colors = Vec::<Color>::deserialize(deserializer)?;
        Ok(Self::from_colors(colors))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_bitmap_costs_nothing() {
        let bm = ColorBitmap::new();
        assert!(bm.is_empty());
        assert_eq!(bm.byte_len(), 0);
        assert_eq!(bm.smallest_unset(), 0);
    }

    #[test]
    fn smallest_gap() {
        let bm = ColorBitmap::from_colors([0, 1, 2, 4]);
        assert_eq!(bm.smallest_unset(), 3);
    }

    #[test]
    fn byte_len_is_trimmed() {
        let bm = ColorBitmap::from_colors([15]);
        assert_eq!(bm.trimmed_bits(), 16);
        assert_eq!(bm.byte_len(), 2);
        let bm = ColorBitmap::from_colors([7]);
        assert_eq!(bm.byte_len(), 1);
    }

    proptest! {
        #[test]
        fn union_contains_both_sides(a in proptest::collection::btree_set(0u32..200, 0..20),
                                     b in proptest::collection::btree_set(0u32..200, 0..20)) {
            let mut u = ColorBitmap::from_colors(a.iter().copied());
            u.union_with(&ColorBitmap::from_colors(b.iter().copied()));
            for &c in a.union(&b) {
                prop_assert!(u.contains(c));
            }
            prop_assert_eq!(u.count(), a.union(&b).count());
        }

        #[test]
        fn smallest_unset_is_first_gap(colors in proptest::collection::btree_set(0u32..64, 0..64)) {
            let bm = ColorBitmap::from_colors(colors.iter().copied());
            let expected = (0u32..).find(|c| !colors.contains(c)).unwrap();
            prop_assert_eq!(bm.smallest_unset(), expected);
        }
    }
}
