use serde::{Deserialize, Serialize};

/// Fixed-capacity set of POI indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PoiMask {
    words: Vec<u64>,
    len: usize,
}

impl PoiMask {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn capacity(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, j: usize) {
        debug_assert!(j < self.len);
        self.words[j / 64] |= 1 << (j % 64);
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.len && self.words[j / 64] & (1 << (j % 64)) != 0
    }

    pub fn union_with(&mut self, other: &PoiMask) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| self.contains(j))
    }
}
