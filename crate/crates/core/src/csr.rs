//! Flat CSR segments.
//!
//! The same layout backs both the main CSR and every diff-CSR delta: an
//! `offsets` array of length `rows + 1` indexing into a concatenated
//! `coordinates` array, plus an optional parallel `weights` array. Deleted
//! edges are not removed; their coordinate cell is overwritten with
//! [`SENTINEL`] and the cell becomes a vacancy that a later insert of the
//! same source may claim.

use std::ops::Range;
use std::sync::atomic::{AtomicI32, AtomicU32, Ordering};

use crate::{NodeId, Weight, SENTINEL};

pub struct Csr {
    offsets: Vec<usize>,
    coordinates: Vec<AtomicU32>,
    weights: Option<Vec<AtomicI32>>,
}

/// A delta segment has exactly the shape of the main CSR.
pub type DiffCsr = Csr;

impl Csr {
    /// An empty segment with `rows` rows and no slots.
    pub fn empty(rows: usize, weighted: bool) -> Self {
        Csr {
            offsets: vec![0; rows + 1],
            coordinates: Vec::new(),
            weights: weighted.then(Vec::new),
        }
    }

    /// Builds a segment from `(row, target, weight)` entries.
    ///
    /// Entries are placed by counting sort on `row`; entries of the same
    /// row keep their relative order.
    pub fn from_entries(rows: usize, weighted: bool, entries: &[(usize, NodeId, Weight)]) -> Self {
        let mut offsets = vec![0usize; rows + 1];
        for &(row, _, _) in entries {
            offsets[row + 1] += 1;
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut coords = vec![SENTINEL; entries.len()];
        let mut weights = vec![0; if weighted { entries.len() } else { 0 }];
        for &(row, target, weight) in entries {
            let at = cursor[row];
            cursor[row] += 1;
            coords[at] = target;
            if weighted {
                weights[at] = weight;
            }
        }
        Csr {
            offsets,
            coordinates: coords.into_iter().map(AtomicU32::new).collect(),
            weights: weighted.then(|| weights.into_iter().map(AtomicI32::new).collect()),
        }
    }

    pub fn rows(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of physical slots, live or vacant.
    pub fn len(&self) -> usize {
        self.coordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coordinates.is_empty()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// Slot range holding `row`'s adjacency: `offsets[row]..offsets[row + 1]`.
    pub fn segment(&self, row: usize) -> Range<usize> {
        self.offsets[row]..self.offsets[row + 1]
    }

    pub fn coordinate(&self, slot: usize) -> NodeId {
        self.coordinates[slot].load(Ordering::Relaxed)
    }

    /// Weight stored at `slot`; unweighted segments report 1.
    pub fn weight(&self, slot: usize) -> Weight {
        match &self.weights {
            Some(w) => w[slot].load(Ordering::Relaxed),
            None => 1,
        }
    }

    pub fn coordinates(&self) -> Vec<NodeId> {
        self.coordinates
            .iter()
            .map(|c| c.load(Ordering::Relaxed))
            .collect()
    }

    pub fn sentinel_count(&self) -> usize {
        self.coordinates
            .iter()
            .filter(|c| c.load(Ordering::Relaxed) == SENTINEL)
            .count()
    }

    /// Claims the vacancy at `slot` for `target`. Returns false if another
    /// writer got there first or the slot is live.
    pub(crate) fn claim(&self, slot: usize, target: NodeId, weight: Weight) -> bool {
        let won = self.coordinates[slot]
            .compare_exchange(SENTINEL, target, Ordering::AcqRel, Ordering::Relaxed)
            .is_ok();
        if won {
            if let Some(w) = &self.weights {
                w[slot].store(weight, Ordering::Relaxed);
            }
        }
        won
    }

    /// Replaces `target` at `slot` with the sentinel.
    pub(crate) fn release(&self, slot: usize, target: NodeId) -> bool {
        self.coordinates[slot]
            .compare_exchange(target, SENTINEL, Ordering::AcqRel, Ordering::Relaxed)
            .is_ok()
    }
}

impl Clone for Csr {
    fn clone(&self) -> Self {
        Csr {
            offsets: self.offsets.clone(),
            coordinates: self
                .coordinates
                .iter()
                .map(|c| AtomicU32::new(c.load(Ordering::Relaxed)))
                .collect(),
            weights: self.weights.as_ref().map(|w| {
                w.iter()
                    .map(|x| AtomicI32::new(x.load(Ordering::Relaxed)))
                    .collect()
            }),
        }
    }
}

impl std::fmt::Debug for Csr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Csr")
            .field("offsets", &self.offsets)
            .field("coordinates", &self.coordinates())
            .finish()
    }
}
