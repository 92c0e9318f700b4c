//! The graph interface the interpreter runs against.

use graphdyn_core::{
    AddReport, DeleteReport, DynamicGraph, EdgeRef, GraphError, Neighbors, NodeId, SlotRemap,
    UpdateRecord,
};

/// Graph operations used by programs.
///
/// `caller` is the node whose iteration issued the request, when there is
/// one; partitioned implementations use it to tell local reads from remote
/// ones. Edge ids must index the flat forward slot space; an in-edge whose
/// forward slot is unknown reports `id == usize::MAX`.
pub trait Topology: Send + Sync {
    type Edges<'a>: Iterator<Item = EdgeRef>
    where
        Self: 'a;

    fn node_count(&self) -> usize;
    fn is_directed(&self) -> bool;
    fn edge_slot_count(&self) -> usize;
    fn live_edge_count(&self) -> usize;
    fn out_edges(&self, caller: Option<NodeId>, v: NodeId) -> Self::Edges<'_>;
    fn in_edges(&self, caller: Option<NodeId>, v: NodeId) -> Result<Self::Edges<'_>, GraphError>;
    fn degree(&self, caller: Option<NodeId>, v: NodeId) -> usize;
    fn in_degree(&self, caller: Option<NodeId>, v: NodeId) -> Result<usize, GraphError>;
    fn find_edge(&self, caller: Option<NodeId>, u: NodeId, v: NodeId) -> Option<EdgeRef>;
    fn update_csr_del(&mut self, batch: &[UpdateRecord]) -> Result<DeleteReport, GraphError>;
    fn update_csr_add(&mut self, batch: &[UpdateRecord]) -> Result<AddReport, GraphError>;
    fn finish_batch(&mut self) -> Option<SlotRemap>;

    /// Called when an iteration requested by `caller` reads or writes a
    /// property cell of `node`. Partitioned graphs meter remote access here.
    fn touch(&self, _caller: NodeId, _node: NodeId, _write: bool) {}
}

fn keep(e: EdgeRef) -> EdgeRef {
    e
}

fn unknown_slot(e: EdgeRef) -> EdgeRef {
    EdgeRef { id: usize::MAX, ..e }
}

impl Topology for DynamicGraph {
    type Edges<'a> = std::iter::Map<Neighbors<'a>, fn(EdgeRef) -> EdgeRef>;

    fn node_count(&self) -> usize {
        DynamicGraph::node_count(self)
    }

    fn is_directed(&self) -> bool {
        DynamicGraph::is_directed(self)
    }

    fn edge_slot_count(&self) -> usize {
        DynamicGraph::edge_slot_count(self)
    }

    fn live_edge_count(&self) -> usize {
        DynamicGraph::live_edge_count(self)
    }

    fn out_edges(&self, _: Option<NodeId>, v: NodeId) -> Self::Edges<'_> {
        self.neighbors(v).map(keep as fn(EdgeRef) -> EdgeRef)
    }

    fn in_edges(&self, _: Option<NodeId>, v: NodeId) -> Result<Self::Edges<'_>, GraphError> {
        // Undirected in-edges are read from the forward arcs, so their ids
        // are already forward slots.
        let f: fn(EdgeRef) -> EdgeRef = if self.is_directed() { unknown_slot } else { keep };
        Ok(self.nodes_to(v)?.map(f))
    }

    fn degree(&self, _: Option<NodeId>, v: NodeId) -> usize {
        DynamicGraph::degree(self, v)
    }

    fn in_degree(&self, _: Option<NodeId>, v: NodeId) -> Result<usize, GraphError> {
        DynamicGraph::in_degree(self, v)
    }

    fn find_edge(&self, _: Option<NodeId>, u: NodeId, v: NodeId) -> Option<EdgeRef> {
        DynamicGraph::find_edge(self, u, v)
    }

    fn update_csr_del(&mut self, batch: &[UpdateRecord]) -> Result<DeleteReport, GraphError> {
        DynamicGraph::update_csr_del(self, batch)
    }

    fn update_csr_add(&mut self, batch: &[UpdateRecord]) -> Result<AddReport, GraphError> {
        DynamicGraph::update_csr_add(self, batch)
    }

    fn finish_batch(&mut self) -> Option<SlotRemap> {
        DynamicGraph::finish_batch(self)
    }
}
