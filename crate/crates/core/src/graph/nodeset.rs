use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A subset of the node ids `0..universe`, stored as a bitmask.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    universe: usize,
    words: Vec<u64>,
    len: usize,
}

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        NodeSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
            len: 0,
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = NodeSet::empty(universe);
        for id in 0..universe {
            set.insert(id);
        }
        set
    }

    /// Builds a set from explicit ids; repeated or out-of-range ids are rejected.
    pub fn from_ids<I>(universe: usize, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut set = NodeSet::empty(universe);
        for id in ids {
            if id >= universe {
                return Err(Error::Domain(format!(
                    "node id {id} out of range for {universe} nodes"
                )));
            }
            if !set.insert(id) {
                return Err(Error::Domain(format!("node id {id} listed twice")));
            }
        }
        Ok(set)
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, id: usize) -> bool {
        id < self.universe && self.words[id / 64] & (1 << (id % 64)) != 0
    }

    /// Returns `true` when `id` was not already present.
    ///
    /// Panics if `id` is outside the universe.
    pub fn insert(&mut self, id: usize) -> bool {
        assert!(id < self.universe, "node id {id} out of range");
        let word = &mut self.words[id / 64];
        let bit = 1 << (id % 64);
        if *word & bit != 0 {
            return false;
        }
        *word |= bit;
        self.len += 1;
        true
    }

    pub fn remove(&mut self, id: usize) -> bool {
        if !self.contains(id) {
            return false;
        }
        self.words[id / 64] &= !(1 << (id % 64));
        self.len -= 1;
        true
    }

    /// Copy of `self` with `id` added.
    pub fn with(&self, id: usize) -> NodeSet {
        let mut set = self.clone();
        set.insert(id);
        set
    }

    /// Ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// The set as a bitmask; only meaningful for universes of at most 64 nodes.
    pub fn as_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }
}

impl Ord for NodeSet {
    /// Lexicographic order on the ascending id sequences.
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter()
            .cmp(other.iter())
            .then(self.universe.cmp(&other.universe))
    }
}

impl PartialOrd for NodeSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
