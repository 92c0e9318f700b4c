use std::collections::HashMap;
use std::ops::Range;
use std::sync::atomic::{AtomicI64, Ordering};

use graphdyn_core::{
    AddReport, Csr, DeleteReport, DynamicGraph, EdgeRef, GraphError, GraphOptions, Neighbors,
    NodeId, SlotRemap, UpdateRecord, Weight,
};
use graphdyn_engine::Topology;

use crate::comm::{CommStats, Counters, RankComm, OFFSET_PAIR_BYTES, RECORD_BYTES, VALUE_BYTES};
use crate::PartitionError;

/// How nodes are assigned to ranks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Ownership {
    /// Contiguous id ranges, the first `n % ranks` ranks one node larger.
    #[default]
    Block,
    /// A multiplicative hash of the node id.
    Hash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulateOp {
    Min,
    Sum,
}

/// The four window views of one rank: offsets and coordinates of the main
/// CSR and of each diff block.
#[derive(Debug, Clone, Copy)]
pub struct Windows<'a> {
    pub base: &'a Csr,
    pub diffs: &'a [Csr],
}

impl Windows<'_> {
    pub fn base_offsets(&self) -> &[usize] {
        self.base.offsets()
    }

    pub fn base_coordinates(&self) -> Vec<NodeId> {
        self.base.coordinates()
    }

    pub fn diff_offsets(&self, k: usize) -> &[usize] {
        self.diffs[k].offsets()
    }

    pub fn diff_coordinates(&self, k: usize) -> Vec<NodeId> {
        self.diffs[k].coordinates()
    }
}

/// A dynamic graph split across logical ranks.
///
/// Rank `r` stores the out-arcs of the nodes it owns in its own main CSR
/// and diff blocks, and, for directed graphs with in-edges, the in-arcs of
/// the nodes it owns. Edge ids are `local_slot * ranks + r`.
#[derive(Debug)]
pub struct PartitionedGraph {
    node_count: usize,
    opts: GraphOptions,
    ranks: usize,
    ownership: Ownership,
    out: Vec<DynamicGraph>,
    inc: Option<Vec<DynamicGraph>>,
    comm: Vec<Counters>,
    props: HashMap<String, Box<[AtomicI64]>>,
}

fn check_ranks(ranks: usize, node_count: usize) -> Result<(), PartitionError> {
    if ranks == 0 {
        return Err(PartitionError::NoRanks);
    }
    if ranks > node_count {
        return Err(PartitionError::TooManyRanks { ranks, node_count });
    }
    Ok(())
}

/// Owned id range of every rank under block ownership.
pub fn block_ranges(node_count: usize, ranks: usize) -> Vec<Range<usize>> {
    let q = node_count / ranks;
    let rem = node_count % ranks;
    let mut start = 0;
    (0..ranks)
        .map(|r| {
            let len = q + usize::from(r < rem);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

fn shard_edges(inner: Neighbors<'_>, rank: usize, ranks: usize, flip: Flip) -> ShardEdges<'_> {
    ShardEdges {
        inner,
        rank,
        ranks,
        flip,
    }
}

#[derive(Debug, Clone, Copy)]
enum Flip {
    Out,
    /// Undirected in-edges, read from the forward arcs of the target.
    Undirected,
    /// Directed in-edges, read from the in-arc shard.
    Reverse,
}

/// Edges of one node read from its owner's shard, with global ids.
pub struct ShardEdges<'a> {
    inner: Neighbors<'a>,
    rank: usize,
    ranks: usize,
    flip: Flip,
}

impl Iterator for ShardEdges<'_> {
    type Item = EdgeRef;

    fn next(&mut self) -> Option<EdgeRef> {
        let e = self.inner.next()?;
        let id = e.id * self.ranks + self.rank;
        Some(match self.flip {
            Flip::Out => EdgeRef { id, ..e },
            Flip::Undirected => EdgeRef {
                source: e.target,
                target: e.source,
                id,
                ..e
            },
            Flip::Reverse => EdgeRef {
                source: e.target,
                target: e.source,
                id: usize::MAX,
                ..e
            },
        })
    }
}

impl PartitionedGraph {
    /// Splits `g` across `ranks` ranks with block ownership.
    pub fn partition(g: &DynamicGraph, ranks: usize) -> Result<Self, PartitionError> {
        Self::with_ownership(g, ranks, Ownership::Block)
    }

    pub fn with_ownership(
        g: &DynamicGraph,
        ranks: usize,
        ownership: Ownership,
    ) -> Result<Self, PartitionError> {
        let n = g.node_count();
        check_ranks(ranks, n)?;
        let opts = g.options();
        let shard_opts = GraphOptions {
            directed: true,
            reverse: false,
            ..opts
        };
        let mut pg = PartitionedGraph {
            node_count: n,
            opts,
            ranks,
            ownership,
            out: Vec::new(),
            inc: None,
            comm: (0..ranks).map(|_| Counters::default()).collect(),
            props: HashMap::new(),
        };
        let mut out_arcs = vec![Vec::new(); ranks];
        for u in 0..n as NodeId {
            let r = pg.owner(u);
            out_arcs[r].extend(g.neighbors(u).map(|e| (u, e.target, e.weight)));
        }
        pg.out = out_arcs
            .iter()
            .map(|arcs| DynamicGraph::build_csr(arcs, n, shard_opts))
            .collect::<Result<_, _>>()?;
        if opts.directed && g.has_reverse() {
            let mut in_arcs = vec![Vec::new(); ranks];
            for v in 0..n as NodeId {
                let r = pg.owner(v);
                in_arcs[r].extend(g.nodes_to(v)?.map(|e| (v, e.source, e.weight)));
            }
            pg.inc = Some(
                in_arcs
                    .iter()
                    .map(|arcs| DynamicGraph::build_csr(arcs, n, shard_opts))
                    .collect::<Result<_, _>>()?,
            );
        }
        Ok(pg)
    }

    pub fn rank_count(&self) -> usize {
        self.ranks
    }

    pub fn ownership(&self) -> Ownership {
        self.ownership
    }

    pub fn owner(&self, v: NodeId) -> usize {
        let v = v as usize;
        match self.ownership {
            Ownership::Block => {
                let q = self.node_count / self.ranks;
                let rem = self.node_count % self.ranks;
                let big = rem * (q + 1);
                if v < big {
                    v / (q + 1)
                } else {
                    rem + (v - big) / q
                }
            }
            Ownership::Hash => {
                ((v as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32) as usize % self.ranks
            }
        }
    }

    pub fn owned_nodes(&self, rank: usize) -> Vec<NodeId> {
        (0..self.node_count as NodeId)
            .filter(|&v| self.owner(v) == rank)
            .collect()
    }

    /// Out-arc shard of `rank`. Its node ids are global.
    pub fn shard(&self, rank: usize) -> &DynamicGraph {
        &self.out[rank]
    }

    pub fn windows(&self, rank: usize) -> Windows<'_> {
        let s = &self.out[rank];
        Windows {
            base: s.base(),
            diffs: s.deltas(),
        }
    }

    /// Logical edges stored at `rank`, listed like [`DynamicGraph::edges`].
    pub fn shard_edges(&self, rank: usize) -> Vec<(NodeId, NodeId, Weight)> {
        let mut out = Vec::new();
        for u in 0..self.node_count as NodeId {
            for e in self.out[rank].neighbors(u) {
                if self.opts.directed || e.source <= e.target {
                    out.push((e.source, e.target, e.weight));
                }
            }
        }
        out
    }

    /// Union of all shards, listed like [`DynamicGraph::edges`].
    pub fn edges(&self) -> Vec<(NodeId, NodeId, Weight)> {
        let mut out = Vec::new();
        for u in 0..self.node_count as NodeId {
            let r = self.owner(u);
            for e in self.out[r].neighbors(u) {
                if self.opts.directed || e.source <= e.target {
                    out.push((e.source, e.target, e.weight));
                }
            }
        }
        out
    }

    pub fn comm(&self) -> CommStats {
        CommStats {
            ranks: self.comm.iter().map(Counters::snapshot).collect(),
        }
    }

    pub fn reset_comm(&self) {
        for c in &self.comm {
            c.reset();
        }
    }

    fn caller_rank(&self, caller: Option<NodeId>) -> Option<usize> {
        caller.map(|c| self.owner(c))
    }

    fn meter_read(&self, from: Option<usize>, owner: usize, reads: u64, bytes: u64) {
        if let Some(r) = from {
            if r != owner {
                self.comm[r].read(reads, bytes);
            }
        }
    }

    fn adjacency_bytes(degree: usize) -> u64 {
        OFFSET_PAIR_BYTES + degree as u64 * RECORD_BYTES
    }

    /// Out-edges of `v` as seen from rank `caller`: an offset-pair read and
    /// a segment read against the owner's windows, both remote unless
    /// `caller` owns `v`.
    pub fn remote_neighbors(&self, caller: usize, v: NodeId) -> (Vec<EdgeRef>, RankComm) {
        let before = self.comm[caller].snapshot();
        let r = self.owner(v);
        let edges: Vec<EdgeRef> =
            shard_edges(self.out[r].neighbors(v), r, self.ranks, Flip::Out).collect();
        self.meter_read(Some(caller), r, 2, Self::adjacency_bytes(edges.len()));
        let after = self.comm[caller].snapshot();
        let delta = RankComm {
            remote_reads: after.remote_reads - before.remote_reads,
            remote_accumulates: after.remote_accumulates - before.remote_accumulates,
            bytes: after.bytes - before.bytes,
        };
        (edges, delta)
    }

    /// Registers a node property held by the owners of its nodes.
    pub fn register_property(&mut self, name: &str, initial: i64) {
        let cells = (0..self.node_count).map(|_| AtomicI64::new(initial)).collect();
        self.props.insert(name.to_string(), cells);
    }

    pub fn property(&self, name: &str) -> Option<Vec<i64>> {
        self.props
            .get(name)
            .map(|c| c.iter().map(|x| x.load(Ordering::Relaxed)).collect())
    }

    /// Atomically combines `value` into `v`'s cell at its owner.
    pub fn remote_accumulate(
        &self,
        caller: usize,
        prop: &str,
        v: NodeId,
        op: AccumulateOp,
        value: i64,
    ) -> Result<(), PartitionError> {
        let cells = self
            .props
            .get(prop)
            .ok_or_else(|| PartitionError::UnknownProperty(prop.to_string()))?;
        let cell = cells
            .get(v as usize)
            .ok_or(PartitionError::NodeOutOfRange(v))?;
        match op {
            AccumulateOp::Min => cell.fetch_min(value, Ordering::AcqRel),
            AccumulateOp::Sum => cell.fetch_add(value, Ordering::AcqRel),
        };
        if caller != self.owner(v) {
            self.comm[caller].accumulate(1, VALUE_BYTES);
        }
        Ok(())
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

    fn primary_arc(&self, r: &UpdateRecord) -> (NodeId, NodeId) {
        let (u, v) = (r.source, r.destination);
        if self.opts.directed || u <= v {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// Deletes `arcs` from the shards owning their sources and returns the
    /// global slot freed by each, in input order.
    fn delete_routed(shards: &[DynamicGraph], owner: impl Fn(NodeId) -> usize, arcs: &[(NodeId, NodeId)]) -> Vec<Option<usize>> {
        let ranks = shards.len();
        let mut groups = vec![Vec::new(); ranks];
        for (i, a) in arcs.iter().enumerate() {
            groups[owner(a.0)].push(i);
        }
        let mut out = vec![None; arcs.len()];
        for (r, idx) in groups.iter().enumerate() {
            if idx.is_empty() {
                continue;
            }
            let local: Vec<_> = idx.iter().map(|&i| arcs[i]).collect();
            let freed = shards[r].forward().delete_arcs(&local);
            for (&i, s) in idx.iter().zip(freed) {
                out[i] = s.map(|s| s * ranks + r);
            }
        }
        out
    }

    /// Applies the delete records of `batch` at the owners of their sources.
    pub fn apply_deletes(&mut self, batch: &[UpdateRecord]) -> Result<DeleteReport, GraphError> {
        self.check(batch)?;
        let dels: Vec<&UpdateRecord> = batch.iter().filter(|r| r.is_delete()).collect();
        let primary: Vec<_> = dels.iter().map(|r| self.primary_arc(r)).collect();
        let hits = Self::delete_routed(&self.out, |v| self.owner(v), &primary);
        let mut report = DeleteReport::default();
        let mut twins = Vec::new();
        let mut back = Vec::new();
        for ((r, &(u, v)), hit) in dels.iter().zip(&primary).zip(hits) {
            match hit {
                Some(s) => {
                    report.applied += 1;
                    report.freed.push(s);
                    if !self.opts.directed && u != v {
                        twins.push((v, u));
                    }
                    back.push((r.destination, r.source));
                }
                None => report.misses.push(**r),
            }
        }
        for &(v, u) in &twins {
            self.meter_write(u, v);
        }
        report.freed.extend(
            Self::delete_routed(&self.out, |v| self.owner(v), &twins)
                .into_iter()
                .flatten(),
        );
        if let Some(inc) = &self.inc {
            for &(d, s) in &back {
                self.meter_write(s, d);
            }
            Self::delete_routed(inc, |v| self.owner(v), &back);
        }
        Ok(report)
    }

    /// Charges rank `owner(from)` for a structural write at `owner(to)`.
    fn meter_write(&self, from: NodeId, to: NodeId) {
        let (a, b) = (self.owner(from), self.owner(to));
        if a != b {
            self.comm[a].accumulate(1, RECORD_BYTES);
        }
    }

    /// Applies the add records of `batch` at the owners of their sources.
    pub fn apply_adds(&mut self, batch: &[UpdateRecord]) -> Result<AddReport, GraphError> {
        self.check(batch)?;
        let ranks = self.ranks;
        let weighted = self.opts.weighted;
        let mut per_rank = vec![Vec::new(); ranks];
        let mut back = vec![Vec::new(); ranks];
        let mut applied = 0;
        for r in batch.iter().filter(|r| r.is_add()) {
            let (s, d) = (r.source, r.destination);
            let w = if weighted { r.weight } else { 1 };
            applied += 1;
            per_rank[self.owner(s)].push(UpdateRecord::add(s, d, w));
            if !self.opts.directed && s != d {
                self.meter_write(s, d);
                per_rank[self.owner(d)].push(UpdateRecord::add(d, s, w));
            }
            if self.inc.is_some() {
                self.meter_write(s, d);
                back[self.owner(d)].push(UpdateRecord::add(d, s, w));
            }
        }
        let mut report = AddReport {
            applied,
            ..AddReport::default()
        };
        for (r, recs) in per_rank.iter().enumerate() {
            if recs.is_empty() {
                continue;
            }
            let rep = self.out[r].update_csr_add(recs)?;
            report.claimed.extend(rep.claimed.iter().map(|s| s * ranks + r));
            report.new_delta |= rep.new_delta;
        }
        if let Some(inc) = &mut self.inc {
            for (r, recs) in back.iter().enumerate() {
                if !recs.is_empty() {
                    inc[r].update_csr_add(recs)?;
                }
            }
        }
        Ok(report)
    }

    /// Ends a batch on every rank. Ranks share one merge interval, so they
    /// compact together; the returned remap covers global edge ids.
    pub fn end_batch(&mut self) -> Option<SlotRemap> {
        let ranks = self.ranks;
        let old_lens: Vec<usize> = self.out.iter().map(|s| s.edge_slot_count()).collect();
        let old_global = old_lens.iter().max().copied().unwrap_or(0) * ranks;
        let remaps: Vec<Option<SlotRemap>> =
            self.out.iter_mut().map(|s| s.finish_batch()).collect();
        if let Some(inc) = &mut self.inc {
            for s in inc {
                s.finish_batch();
            }
        }
        if remaps.iter().all(Option::is_none) {
            return None;
        }
        let new_global = self.edge_slot_count();
        let mut map = vec![usize::MAX; old_global];
        for (g, m) in map.iter_mut().enumerate() {
            let (l, r) = (g / ranks, g % ranks);
            if l >= old_lens[r] {
                continue;
            }
            let moved = match &remaps[r] {
                Some(remap) => remap.get(l),
                None => Some(l),
            };
            if let Some(nl) = moved {
                *m = nl * ranks + r;
            }
        }
        Some(SlotRemap::new(map, new_global))
    }

    /// Applies one batch, deletes first, and returns the traffic it caused.
    pub fn apply_batch_partitioned(
        &mut self,
        batch: &[UpdateRecord],
    ) -> Result<CommStats, GraphError> {
        let before = self.comm();
        self.apply_deletes(batch)?;
        self.apply_adds(batch)?;
        self.end_batch();
        Ok(self.comm().since(&before))
    }

    fn in_shard(&self, r: usize) -> Result<&DynamicGraph, GraphError> {
        if !self.opts.directed {
            return Ok(&self.out[r]);
        }
        self.inc
            .as_ref()
            .map(|inc| &inc[r])
            .ok_or(GraphError::NoReverse)
    }
}

impl Topology for PartitionedGraph {
    type Edges<'a> = ShardEdges<'a>;

    fn node_count(&self) -> usize {
        self.node_count
    }

    fn is_directed(&self) -> bool {
        self.opts.directed
    }

    fn edge_slot_count(&self) -> usize {
        self.out.iter().map(|s| s.edge_slot_count()).max().unwrap_or(0) * self.ranks
    }

    fn live_edge_count(&self) -> usize {
        self.out.iter().map(|s| s.live_edge_count()).sum()
    }

    fn out_edges(&self, caller: Option<NodeId>, v: NodeId) -> ShardEdges<'_> {
        let r = self.owner(v);
        let shard = &self.out[r];
        self.meter_read(self.caller_rank(caller), r, 2, Self::adjacency_bytes(shard.degree(v)));
        shard_edges(shard.neighbors(v), r, self.ranks, Flip::Out)
    }

    fn in_edges(&self, caller: Option<NodeId>, v: NodeId) -> Result<ShardEdges<'_>, GraphError> {
        let r = self.owner(v);
        let shard = self.in_shard(r)?;
        self.meter_read(self.caller_rank(caller), r, 2, Self::adjacency_bytes(shard.degree(v)));
        let flip = if self.opts.directed {
            Flip::Reverse
        } else {
            Flip::Undirected
        };
        Ok(shard_edges(shard.neighbors(v), r, self.ranks, flip))
    }

    fn degree(&self, caller: Option<NodeId>, v: NodeId) -> usize {
        let r = self.owner(v);
        self.meter_read(self.caller_rank(caller), r, 1, OFFSET_PAIR_BYTES);
        self.out[r].degree(v)
    }

    fn in_degree(&self, caller: Option<NodeId>, v: NodeId) -> Result<usize, GraphError> {
        let r = self.owner(v);
        let shard = self.in_shard(r)?;
        self.meter_read(self.caller_rank(caller), r, 1, OFFSET_PAIR_BYTES);
        Ok(shard.degree(v))
    }

    fn find_edge(&self, caller: Option<NodeId>, u: NodeId, v: NodeId) -> Option<EdgeRef> {
        let r = self.owner(u);
        let shard = &self.out[r];
        self.meter_read(self.caller_rank(caller), r, 2, Self::adjacency_bytes(shard.degree(u)));
        shard.find_edge(u, v).map(|e| EdgeRef {
            id: e.id * self.ranks + r,
            ..e
        })
    }

    fn update_csr_del(&mut self, batch: &[UpdateRecord]) -> Result<DeleteReport, GraphError> {
        self.apply_deletes(batch)
    }

    fn update_csr_add(&mut self, batch: &[UpdateRecord]) -> Result<AddReport, GraphError> {
        self.apply_adds(batch)
    }

    fn finish_batch(&mut self) -> Option<SlotRemap> {
        self.end_batch()
    }

    fn touch(&self, caller: NodeId, node: NodeId, write: bool) {
        let (a, b) = (self.owner(caller), self.owner(node));
        if a != b {
            if write {
                self.comm[a].accumulate(1, VALUE_BYTES);
            } else {
                self.comm[a].read(1, VALUE_BYTES);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn figure() -> DynamicGraph {
        // A0:{B}, B1:{C,D}, C2:{A}, D3:{E}, E4:{F}, F5:{D}
        let edges = [(0, 1, 1), (1, 2, 1), (1, 3, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1)];
        let opts = GraphOptions {
            reverse: true,
            ..GraphOptions::default()
        };
        DynamicGraph::build_csr(&edges, 6, opts).unwrap()
    }

    fn sorted(mut e: Vec<(NodeId, NodeId, Weight)>) -> Vec<(NodeId, NodeId, Weight)> {
        e.sort_unstable();
        e
    }

    #[test]
    fn block_ranges_put_the_remainder_first() {
        let sizes: Vec<usize> = block_ranges(10, 3).iter().map(|r| r.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        let g = DynamicGraph::build_csr(&[], 10, GraphOptions::default()).unwrap();
        let pg = PartitionedGraph::partition(&g, 3).unwrap();
        let owners: Vec<usize> = (0..10).map(|v| pg.owner(v)).collect();
        assert_eq!(owners, vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn too_many_ranks_is_a_config_error() {
        let g = DynamicGraph::build_csr(&[], 2, GraphOptions::default()).unwrap();
        assert!(matches!(
            PartitionedGraph::partition(&g, 3),
            Err(PartitionError::TooManyRanks { .. })
        ));
        assert!(matches!(PartitionedGraph::partition(&g, 0), Err(PartitionError::NoRanks)));
    }

    #[test]
    fn one_rank_holds_everything() {
        let g = figure();
        let pg = PartitionedGraph::partition(&g, 1).unwrap();
        assert_eq!(pg.shard_edges(0), g.edges());
    }

    #[test]
    fn shards_store_only_owned_sources() {
        let g = figure();
        let pg = PartitionedGraph::partition(&g, 3).unwrap();
        let mut union = Vec::new();
        for r in 0..3 {
            let part = pg.shard_edges(r);
            assert!(part.iter().all(|e| pg.owner(e.0) == r));
            union.extend(part);
        }
        assert_eq!(sorted(union), sorted(g.edges()));
    }

    #[test]
    fn remote_neighbors_count_two_reads() {
        let pg = PartitionedGraph::partition(&figure(), 3).unwrap();
        let (local, d) = pg.remote_neighbors(0, 1);
        assert!(d.is_zero());
        let targets: Vec<NodeId> = local.iter().map(|e| e.target).collect();
        assert_eq!(targets, vec![2, 3]);
        let (remote, d) = pg.remote_neighbors(2, 1);
        assert_eq!(remote.len(), 2);
        assert_eq!(d.remote_reads, 2);
        assert_eq!(d.bytes, OFFSET_PAIR_BYTES + 2 * RECORD_BYTES);
        assert_eq!(pg.comm().ranks[2].remote_reads, 2);
        assert!(pg.comm().ranks[0].is_zero());
    }

    #[test]
    fn accumulates_combine_at_the_owner() {
        let mut pg = PartitionedGraph::partition(&figure(), 2).unwrap();
        pg.register_property("dist", 48);
        pg.remote_accumulate(1, "dist", 2, AccumulateOp::Min, 40).unwrap();
        pg.remote_accumulate(0, "dist", 3, AccumulateOp::Sum, 0).unwrap();
        let d = pg.property("dist").unwrap();
        assert_eq!((d[2], d[3]), (40, 48));
        assert_eq!(pg.comm().ranks[1].remote_accumulates, 1);
        assert_eq!(pg.comm().ranks[0].remote_accumulates, 1);
        assert!(matches!(
            pg.remote_accumulate(0, "nope", 0, AccumulateOp::Min, 1),
            Err(PartitionError::UnknownProperty(_))
        ));
    }

    #[test]
    fn concurrent_min_accumulates_keep_the_minimum() {
        let mut pg = PartitionedGraph::partition(&figure(), 3).unwrap();
        pg.register_property("best", i64::MAX);
        std::thread::scope(|s| {
            for t in 0..8i64 {
                let pg = &pg;
                s.spawn(move || {
                    for k in 0..200 {
                        let value = 1000 + (t * 7919 + k * 31) % 977;
                        pg.remote_accumulate((t % 3) as usize, "best", 5, AccumulateOp::Min, value)
                            .unwrap();
                    }
                });
            }
        });
        let want = (0..8i64)
            .flat_map(|t| (0..200).map(move |k| 1000 + (t * 7919 + k * 31) % 977))
            .min()
            .unwrap();
        assert_eq!(pg.property("best").unwrap()[5], want);
    }

    #[test]
    fn figure_batch_on_three_ranks() {
        let mut g = figure();
        let mut pg = PartitionedGraph::partition(&g, 3).unwrap();
        let batch = [UpdateRecord::delete(1, 3), UpdateRecord::add(4, 2, 1)];
        pg.apply_batch_partitioned(&batch).unwrap();
        g.update_csr_del(&batch).unwrap();
        g.update_csr_add(&batch).unwrap();
        g.finish_batch();
        assert_eq!(sorted(pg.edges()), sorted(g.edges()));
        assert_eq!(pg.live_edge_count(), g.live_edge_count());
    }

    #[test]
    fn rank_local_batch_costs_nothing() {
        let mut pg = PartitionedGraph::partition(&figure(), 2).unwrap();
        let stats = pg
            .apply_batch_partitioned(&[UpdateRecord::delete(0, 1), UpdateRecord::add(2, 1, 3)])
            .unwrap();
        assert!(stats.total().is_zero());
    }

    #[test]
    fn hash_ownership_is_a_partition() {
        let g = figure();
        let pg = PartitionedGraph::with_ownership(&g, 2, Ownership::Hash).unwrap();
        let mut all: Vec<NodeId> = (0..2).flat_map(|r| pg.owned_nodes(r)).collect();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        let union: Vec<_> = (0..2).flat_map(|r| pg.shard_edges(r)).collect();
        assert_eq!(sorted(union), sorted(g.edges()));
    }
}
