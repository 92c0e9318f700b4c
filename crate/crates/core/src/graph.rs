use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::{Csr, GraphError, NodeId, UpdateRecord, Weight, SENTINEL};

/// Physical location of an edge: segment 0 is the main CSR, segment `k`
/// is the `k`-th delta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub segment: usize,
    pub index: usize,
}

/// A live edge together with the cell that stores it.
///
/// `id` is the flat slot number (segment start plus index) and stays valid
/// until the next merge; per-edge properties are indexed by it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub source: NodeId,
    pub target: NodeId,
    pub weight: Weight,
    pub slot: Slot,
    pub id: usize,
}

/// Old flat slot id to new flat slot id after compaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotRemap {
    map: Vec<usize>,
    new_len: usize,
}

impl SlotRemap {
    /// `map[old]` is the new slot of `old`, or `usize::MAX` if it was dropped.
    pub fn new(map: Vec<usize>, new_len: usize) -> Self {
        debug_assert!(map.iter().all(|&s| s == usize::MAX || s < new_len));
        SlotRemap { map, new_len }
    }

    pub fn get(&self, old: usize) -> Option<usize> {
        self.map.get(old).copied().filter(|&s| s != usize::MAX)
    }

    pub fn old_len(&self) -> usize {
        self.map.len()
    }

    pub fn new_len(&self) -> usize {
        self.new_len
    }

    /// Moves per-slot values to their post-merge positions.
    pub fn apply<T: Clone>(&self, old: &[T], fill: T) -> Vec<T> {
        let mut out = vec![fill; self.new_len];
        for (o, &n) in self.map.iter().enumerate() {
            if n != usize::MAX {
                out[n] = old[o].clone();
            }
        }
        out
    }
}

/// One direction of adjacency: a main CSR and its deltas, with O(1) degree.
pub struct Adjacency {
    rows: usize,
    weighted: bool,
    segments: Vec<Csr>,
    starts: Vec<usize>,
    degrees: Vec<AtomicU32>,
    live: AtomicUsize,
}

impl Adjacency {
    pub fn from_arcs(rows: usize, weighted: bool, arcs: &[(NodeId, NodeId, Weight)]) -> Self {
        let entries: Vec<_> = arcs.iter().map(|&(u, v, w)| (u as usize, v, w)).collect();
        let base = Csr::from_entries(rows, weighted, &entries);
        let degrees = (0..rows)
            .map(|r| AtomicU32::new(base.segment(r).len() as u32))
            .collect();
        Adjacency {
            rows,
            weighted,
            segments: vec![base],
            starts: vec![0],
            degrees,
            live: AtomicUsize::new(arcs.len()),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn base(&self) -> &Csr {
        &self.segments[0]
    }

    pub fn deltas(&self) -> &[Csr] {
        &self.segments[1..]
    }

    pub fn live(&self) -> usize {
        self.live.load(Ordering::Relaxed)
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.degrees[v as usize].load(Ordering::Relaxed) as usize
    }

    /// Total physical slots over all segments, live or vacant.
    pub fn slot_count(&self) -> usize {
        self.starts.last().unwrap() + self.segments.last().unwrap().len()
    }

    pub fn sentinel_count(&self) -> usize {
        self.segments.iter().map(Csr::sentinel_count).sum()
    }

    pub fn flat_id(&self, slot: Slot) -> usize {
        self.starts[slot.segment] + slot.index
    }

    pub fn neighbors(&self, v: NodeId) -> Neighbors<'_> {
        Neighbors::new(self, v, false)
    }

    /// First live `u -> t` edge in iteration order.
    pub fn find(&self, u: NodeId, t: NodeId) -> Option<EdgeRef> {
        self.neighbors(u).find(|e| e.target == t)
    }

    fn release_one(&self, u: NodeId, t: NodeId) -> Option<usize> {
        for (s, seg) in self.segments.iter().enumerate() {
            for i in seg.segment(u as usize) {
                if seg.coordinate(i) == t && seg.release(i, t) {
                    self.degrees[u as usize].fetch_sub(1, Ordering::Relaxed);
                    self.live.fetch_sub(1, Ordering::Relaxed);
                    return Some(self.starts[s] + i);
                }
            }
        }
        None
    }

    fn claim_one(&self, u: NodeId, t: NodeId, w: Weight) -> Option<usize> {
        for (s, seg) in self.segments.iter().enumerate() {
            for i in seg.segment(u as usize) {
                if seg.coordinate(i) == SENTINEL && seg.claim(i, t, w) {
                    self.degrees[u as usize].fetch_add(1, Ordering::Relaxed);
                    self.live.fetch_add(1, Ordering::Relaxed);
                    return Some(self.starts[s] + i);
                }
            }
        }
        None
    }

    /// Sentinels one matching slot per arc. Returns the freed flat slot for
    /// each arc, or `None` on a miss.
    ///
    /// Arcs sharing a source are handled in input order by one worker, so
    /// slot choice does not depend on the worker count.
    pub fn delete_arcs(&self, arcs: &[(NodeId, NodeId)]) -> Vec<Option<usize>> {
        let order = grouped_by_source(arcs.len(), |i| arcs[i].0);
        let found: Vec<(usize, Option<usize>)> = order
            .par_chunk_by(|&a, &b| arcs[a].0 == arcs[b].0)
            .flat_map_iter(|group| {
                group
                    .iter()
                    .map(|&i| (i, self.release_one(arcs[i].0, arcs[i].1)))
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = vec![None; arcs.len()];
        for (i, slot) in found {
            out[i] = slot;
        }
        out
    }

    /// Inserts every arc, reusing vacancies in the source's segments first.
    /// Arcs that find no vacancy form one new delta. Returns the flat slot of
    /// each arc and whether a delta was appended.
    pub fn add_arcs(&mut self, arcs: &[(NodeId, NodeId, Weight)]) -> (Vec<usize>, bool) {
        let order = grouped_by_source(arcs.len(), |i| arcs[i].0);
        let this = &*self;
        let claimed: Vec<(usize, Option<usize>)> = order
            .par_chunk_by(|&a, &b| arcs[a].0 == arcs[b].0)
            .flat_map_iter(|group| {
                group
                    .iter()
                    .map(|&i| {
                        let (u, v, w) = arcs[i];
                        (i, this.claim_one(u, v, w))
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = vec![usize::MAX; arcs.len()];
        let mut overflow = Vec::new();
        for (i, slot) in claimed {
            match slot {
                Some(s) => out[i] = s,
                None => overflow.push(i),
            }
        }
        if overflow.is_empty() {
            return (out, false);
        }
        overflow.sort_unstable();
        let entries: Vec<_> = overflow
            .iter()
            .map(|&i| (arcs[i].0 as usize, arcs[i].1, arcs[i].2))
            .collect();
        let delta = Csr::from_entries(self.rows, self.weighted, &entries);
        let start = self.slot_count();
        let mut cursor = delta.offsets().to_vec();
        for (&i, &(row, _, _)) in overflow.iter().zip(&entries) {
            out[i] = start + cursor[row];
            cursor[row] += 1;
            self.degrees[row].fetch_add(1, Ordering::Relaxed);
        }
        self.live.fetch_add(overflow.len(), Ordering::Relaxed);
        self.starts.push(start);
        self.segments.push(delta);
        (out, true)
    }

    /// Folds all deltas into a sentinel-free main CSR, keeping each row's
    /// neighbor order. Returns `None` when already compact.
    pub fn merge(&mut self) -> Option<SlotRemap> {
        if self.segments.len() == 1 && self.segments[0].sentinel_count() == 0 {
            return None;
        }
        let old_len = self.slot_count();
        let mut map = vec![usize::MAX; old_len];
        let mut entries = Vec::with_capacity(self.live());
        for r in 0..self.rows {
            for e in self.neighbors(r as NodeId) {
                map[e.id] = entries.len();
                entries.push((r, e.target, e.weight));
            }
        }
        let base = Csr::from_entries(self.rows, self.weighted, &entries);
        self.segments = vec![base];
        self.starts = vec![0];
        Some(SlotRemap {
            map,
            new_len: entries.len(),
        })
    }
}

impl Clone for Adjacency {
    fn clone(&self) -> Self {
        Adjacency {
            rows: self.rows,
            weighted: self.weighted,
            segments: self.segments.clone(),
            starts: self.starts.clone(),
            degrees: self
                .degrees
                .iter()
                .map(|d| AtomicU32::new(d.load(Ordering::Relaxed)))
                .collect(),
            live: AtomicUsize::new(self.live()),
        }
    }
}

impl std::fmt::Debug for Adjacency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Adjacency")
            .field("rows", &self.rows)
            .field("segments", &self.segments)
            .field("live", &self.live())
            .finish()
    }
}

fn grouped_by_source(len: usize, source: impl Fn(usize) -> NodeId) -> Vec<usize> {
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by_key(|&i| source(i));
    order
}

/// Live edges of one row: main segment first, then deltas oldest-first.
pub struct Neighbors<'a> {
    adj: &'a Adjacency,
    row: NodeId,
    flipped: bool,
    segment: usize,
    cursor: usize,
    end: usize,
}

impl<'a> Neighbors<'a> {
    fn new(adj: &'a Adjacency, row: NodeId, flipped: bool) -> Self {
        let r = adj.segments[0].segment(row as usize);
        Neighbors {
            adj,
            row,
            flipped,
            segment: 0,
            cursor: r.start,
            end: r.end,
        }
    }
}

impl Iterator for Neighbors<'_> {
    type Item = EdgeRef;

    fn next(&mut self) -> Option<EdgeRef> {
        loop {
            if self.cursor < self.end {
                let seg = &self.adj.segments[self.segment];
                let i = self.cursor;
                self.cursor += 1;
                let t = seg.coordinate(i);
                if t == SENTINEL {
                    continue;
                }
                let (source, target) = if self.flipped {
                    (t, self.row)
                } else {
                    (self.row, t)
                };
                return Some(EdgeRef {
                    source,
                    target,
                    weight: seg.weight(i),
                    slot: Slot {
                        segment: self.segment,
                        index: i,
                    },
                    id: self.adj.starts[self.segment] + i,
                });
            }
            self.segment += 1;
            let seg = self.adj.segments.get(self.segment)?;
            let r = seg.segment(self.row as usize);
            self.cursor = r.start;
            self.end = r.end;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphOptions {
    pub directed: bool,
    pub weighted: bool,
    /// Maintain in-edges for `nodes_to`. Undirected graphs always have them.
    pub reverse: bool,
    /// Merge deltas into the main CSR after this many batches.
    pub merge_interval: usize,
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            directed: true,
            weighted: true,
            reverse: false,
            merge_interval: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeleteReport {
    pub applied: usize,
    pub misses: Vec<UpdateRecord>,
    /// Flat forward slots that became vacant.
    pub freed: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AddReport {
    pub applied: usize,
    /// Flat forward slots now holding the inserted arcs.
    pub claimed: Vec<usize>,
    pub new_delta: bool,
}

/// A graph whose edge set changes in batches.
///
/// Undirected graphs store each edge as two arcs (a self-loop as one).
#[derive(Debug, Clone)]
pub struct DynamicGraph {
    node_count: usize,
    opts: GraphOptions,
    forward: Adjacency,
    reverse: Option<Adjacency>,
    batches_since_merge: usize,
}

impl DynamicGraph {
    pub fn build_csr(
        edges: &[(NodeId, NodeId, Weight)],
        node_count: usize,
        opts: GraphOptions,
    ) -> Result<Self, GraphError> {
        if node_count >= SENTINEL as usize {
            return Err(GraphError::TooManyNodes(node_count));
        }
        if opts.merge_interval == 0 {
            return Err(GraphError::Config("merge interval must be positive".into()));
        }
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            for node in [u, v] {
                if node as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange {
                        line: i + 1,
                        node,
                        node_count,
                    });
                }
            }
            if opts.weighted && w < 0 {
                return Err(GraphError::NegativeWeight {
                    from: u,
                    target: v,
                    weight: w,
                });
            }
        }
        let edges: Vec<_> = edges
            .iter()
            .map(|&(u, v, w)| (u, v, if opts.weighted { w } else { 1 }))
            .collect();
        let arcs = if opts.directed {
            edges.clone()
        } else {
            let mut arcs = Vec::with_capacity(edges.len() * 2);
            for &(u, v, w) in &edges {
                arcs.push((u, v, w));
                if u != v {
                    arcs.push((v, u, w));
                }
            }
            arcs
        };
        let forward = Adjacency::from_arcs(node_count, opts.weighted, &arcs);
        let reverse = (opts.directed && opts.reverse).then(|| {
            let back: Vec<_> = edges.iter().map(|&(u, v, w)| (v, u, w)).collect();
            Adjacency::from_arcs(node_count, opts.weighted, &back)
        });
        Ok(DynamicGraph {
            node_count,
            opts,
            forward,
            reverse,
            batches_since_merge: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn options(&self) -> GraphOptions {
        self.opts
    }

    pub fn is_directed(&self) -> bool {
        self.opts.directed
    }

    pub fn is_weighted(&self) -> bool {
        self.opts.weighted
    }

    pub fn has_reverse(&self) -> bool {
        !self.opts.directed || self.reverse.is_some()
    }

    pub fn merge_interval(&self) -> usize {
        self.opts.merge_interval
    }

    pub fn set_merge_interval(&mut self, k: usize) {
        self.opts.merge_interval = k.max(1);
    }

    /// Number of live arcs (twice the edge count for undirected graphs).
    pub fn live_edge_count(&self) -> usize {
        self.forward.live()
    }

    pub fn base(&self) -> &Csr {
        self.forward.base()
    }

    pub fn deltas(&self) -> &[Csr] {
        self.forward.deltas()
    }

    pub fn forward(&self) -> &Adjacency {
        &self.forward
    }

    pub fn reverse(&self) -> Option<&Adjacency> {
        self.reverse.as_ref()
    }

    /// Size of the flat slot space that edge properties are indexed by.
    pub fn edge_slot_count(&self) -> usize {
        self.forward.slot_count()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.forward.degree(v)
    }

    pub fn in_degree(&self, v: NodeId) -> Result<usize, GraphError> {
        match (&self.reverse, self.opts.directed) {
            (_, false) => Ok(self.forward.degree(v)),
            (Some(r), true) => Ok(r.degree(v)),
            (None, true) => Err(GraphError::NoReverse),
        }
    }

    pub fn neighbors(&self, v: NodeId) -> Neighbors<'_> {
        self.forward.neighbors(v)
    }

    /// In-edges of `v`, reported with `source` the in-neighbor and `target`
    /// equal to `v`. Slots refer to the reverse structure.
    pub fn nodes_to(&self, v: NodeId) -> Result<Neighbors<'_>, GraphError> {
        match (&self.reverse, self.opts.directed) {
            (_, false) => Ok(Neighbors::new(&self.forward, v, true)),
            (Some(r), true) => Ok(Neighbors::new(r, v, true)),
            (None, true) => Err(GraphError::NoReverse),
        }
    }

    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeRef> {
        self.forward.find(u, v)
    }

    fn check(&self, batch: &[UpdateRecord]) -> Result<(), GraphError> {
        for (i, r) in batch.iter().enumerate() {
            for node in [r.source, r.destination] {
                if node as usize >= self.node_count {
                    return Err(GraphError::UpdateOutOfRange {
                        index: i,
                        record: r.to_string(),
                        node,
                        node_count: self.node_count,
                    });
                }
            }
        }
        Ok(())
    }

    /// Undirected deletes always target the `min -> max` arc first, so two
    /// deletes naming the same edge in opposite directions consume one copy
    /// each.
    fn primary_arc(&self, r: &UpdateRecord) -> (NodeId, NodeId) {
        let (u, v) = (r.source, r.destination);
        if self.opts.directed || u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Applies the delete records of `batch`; add records are ignored.
    pub fn update_csr_del(&mut self, batch: &[UpdateRecord]) -> Result<DeleteReport, GraphError> {
        self.check(batch)?;
        let dels: Vec<&UpdateRecord> = batch.iter().filter(|r| r.is_delete()).collect();
        let mut arcs = Vec::with_capacity(dels.len() * 2);
        for r in &dels {
            arcs.push(self.primary_arc(r));
        }
        let primary = self.forward.delete_arcs(&arcs);
        let mut report = DeleteReport::default();
        let mut twins = Vec::new();
        let mut back = Vec::new();
        for (r, slot) in dels.iter().zip(&primary) {
            match slot {
                Some(s) => {
                    report.applied += 1;
                    report.freed.push(*s);
                    if !self.opts.directed && r.source != r.destination {
                        let (u, v) = self.primary_arc(r);
                        twins.push((v, u));
                    }
                    back.push((r.destination, r.source));
                }
                None => report.misses.push(**r),
            }
        }
        if !twins.is_empty() {
            report
                .freed
                .extend(self.forward.delete_arcs(&twins).into_iter().flatten());
        }
        if let Some(rev) = &self.reverse {
            rev.delete_arcs(&back);
        }
        Ok(report)
    }

    /// Applies the add records of `batch`; delete records are ignored.
    pub fn update_csr_add(&mut self, batch: &[UpdateRecord]) -> Result<AddReport, GraphError> {
        self.check(batch)?;
        let w = |r: &UpdateRecord| if self.opts.weighted { r.weight } else { 1 };
        let mut arcs = Vec::new();
        let mut back = Vec::new();
        for r in batch.iter().filter(|r| r.is_add()) {
            arcs.push((r.source, r.destination, w(r)));
            if !self.opts.directed && r.source != r.destination {
                arcs.push((r.destination, r.source, w(r)));
            }
            back.push((r.destination, r.source, w(r)));
        }
        let applied = back.len();
        let (claimed, new_delta) = self.forward.add_arcs(&arcs);
        if let Some(rev) = &mut self.reverse {
            rev.add_arcs(&back);
        }
        Ok(AddReport {
            applied,
            claimed,
            new_delta,
        })
    }

    /// Compacts deltas and sentinels. The remap covers forward slots.
    pub fn merge_deltas(&mut self) -> Option<SlotRemap> {
        if let Some(rev) = &mut self.reverse {
            rev.merge();
        }
        self.batches_since_merge = 0;
        self.forward.merge()
    }

    /// Marks the end of a batch and merges when the interval is reached.
    pub fn finish_batch(&mut self) -> Option<SlotRemap> {
        self.batches_since_merge += 1;
        if self.batches_since_merge >= self.opts.merge_interval {
            self.merge_deltas()
        } else {
            None
        }
    }

    /// Logical edge multiset. Undirected edges are listed once with
    /// `source <= target`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, Weight)> {
        let mut out = Vec::with_capacity(self.live_edge_count());
        for u in 0..self.node_count as NodeId {
            for e in self.neighbors(u) {
                if self.opts.directed || e.source <= e.target {
                    out.push((e.source, e.target, e.weight));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: NodeId = 0;
    const B: NodeId = 1;
    const C: NodeId = 2;
    const D: NodeId = 3;
    const E: NodeId = 4;
    const F: NodeId = 5;

    fn figure() -> DynamicGraph {
        let edges = [
            (A, B, 1),
            (B, C, 1),
            (B, D, 1),
            (C, A, 1),
            (D, E, 1),
            (E, F, 1),
            (F, D, 1),
        ];
        let opts = GraphOptions {
            weighted: false,
            reverse: true,
            merge_interval: 4,
            ..Default::default()
        };
        DynamicGraph::build_csr(&edges, 6, opts).unwrap()
    }

    fn targets(g: &DynamicGraph, v: NodeId) -> Vec<NodeId> {
        g.neighbors(v).map(|e| e.target).collect()
    }

    #[test]
    fn offsets_follow_source_order() {
        let g = figure();
        assert_eq!(g.base().offsets()[C as usize], 3);
        assert_eq!(targets(&g, B), vec![C, D]);
        assert_eq!(g.degree(B), 2);
        assert_eq!(g.live_edge_count(), 7);
    }

    #[test]
    fn delete_then_add_builds_delta() {
        let mut g = figure();
        let r = g.update_csr_del(&[UpdateRecord::delete(B, D)]).unwrap();
        assert_eq!(r.applied, 1);
        assert_eq!(g.base().coordinate(2), SENTINEL);
        assert_eq!(g.degree(B), 1);
        g.finish_batch();
        let r = g.update_csr_add(&[UpdateRecord::add(E, C, 1)]).unwrap();
        assert!(r.new_delta);
        let delta = &g.deltas()[0];
        assert_eq!(delta.offsets()[E as usize], 0);
        assert_eq!(delta.offsets()[F as usize], 1);
        assert_eq!(delta.coordinates(), vec![C]);
        assert_eq!(targets(&g, E), vec![F, C]);
        let into_c: Vec<_> = g.nodes_to(C).unwrap().map(|e| e.source).collect();
        assert_eq!(into_c, vec![B, E]);
    }

    #[test]
    fn vacancy_is_reused_by_same_source() {
        let mut g = figure();
        g.update_csr_del(&[UpdateRecord::delete(B, D)]).unwrap();
        let r = g.update_csr_add(&[UpdateRecord::add(B, E, 1)]).unwrap();
        assert!(!r.new_delta);
        assert_eq!(r.claimed, vec![2]);
        assert_eq!(targets(&g, B), vec![C, E]);
    }

    #[test]
    fn delete_miss_is_reported() {
        let mut g = figure();
        let r = g.update_csr_del(&[UpdateRecord::delete(A, F)]).unwrap();
        assert_eq!(r.misses, vec![UpdateRecord::delete(A, F)]);
        assert_eq!(g.live_edge_count(), 7);
    }

    #[test]
    fn duplicate_deletes_consume_distinct_slots() {
        let edges = [(0, 1, 3), (0, 1, 3), (1, 2, 1)];
        let mut g = DynamicGraph::build_csr(&edges, 3, GraphOptions::default()).unwrap();
        let r = g
            .update_csr_del(&[UpdateRecord::delete(0, 1), UpdateRecord::delete(0, 1)])
            .unwrap();
        assert_eq!(r.applied, 2);
        assert_eq!(g.degree(0), 0);
        assert_eq!(g.base().sentinel_count(), 2);
    }

    #[test]
    fn merge_compacts_and_remaps() {
        let mut g = figure();
        g.update_csr_del(&[UpdateRecord::delete(B, D)]).unwrap();
        g.update_csr_add(&[UpdateRecord::add(E, C, 1)]).unwrap();
        let remap = g.merge_deltas().unwrap();
        assert!(g.deltas().is_empty());
        assert_eq!(g.base().sentinel_count(), 0);
        assert_eq!(targets(&g, B), vec![C]);
        assert_eq!(targets(&g, E), vec![F, C]);
        assert_eq!(remap.get(2), None);
        assert_eq!(remap.get(7), Some(5));
        assert!(g.merge_deltas().is_none());
    }

    #[test]
    fn undirected_stores_both_arcs() {
        let opts = GraphOptions {
            directed: false,
            ..Default::default()
        };
        let mut g = DynamicGraph::build_csr(&[(0, 1, 2), (1, 2, 5)], 3, opts).unwrap();
        assert_eq!(g.live_edge_count(), 4);
        assert_eq!(targets(&g, 1), vec![0, 2]);
        g.update_csr_del(&[UpdateRecord::delete(2, 1)]).unwrap();
        assert_eq!(targets(&g, 1), vec![0]);
        assert_eq!(g.edges(), vec![(0, 1, 2)]);
    }

    #[test]
    fn out_of_range_edge_names_the_line() {
        let err = DynamicGraph::build_csr(&[(0, 1, 1), (0, 9, 1)], 3, GraphOptions::default())
            .unwrap_err();
        assert!(matches!(err, GraphError::NodeOutOfRange { line: 2, node: 9, .. }));
    }

    #[test]
    fn nodes_to_requires_reverse() {
        let g = DynamicGraph::build_csr(&[(0, 1, 1)], 2, GraphOptions::default()).unwrap();
        assert!(matches!(g.nodes_to(1), Err(GraphError::NoReverse)));
    }
}
