//! In-process simulation of a dynamic graph distributed over logical ranks.
//!
//! Each rank owns a block of nodes and stores their adjacency in its own
//! main CSR and diff blocks. Reads of another rank's adjacency and writes to
//! another rank's cells are one-sided operations; they are not simulated
//! with latency but counted per issuing rank in [`CommStats`].
//!
//! [`PartitionedGraph`] implements the engine's graph interface, so any
//! program can run on it unchanged.

mod comm;
mod graph;

use graphdyn_core::{GraphError, NodeId};
use thiserror::Error;

pub use comm::{CommStats, RankComm, OFFSET_PAIR_BYTES, RECORD_BYTES, VALUE_BYTES};
pub use graph::{block_ranges, AccumulateOp, Ownership, PartitionedGraph, ShardEdges, Windows};

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("rank count must be positive")]
    NoRanks,
    #[error("{ranks} ranks for {node_count} nodes: every rank needs at least one node")]
    TooManyRanks { ranks: usize, node_count: usize },
    #[error("no partitioned property named `{0}`")]
    UnknownProperty(String),
    #[error("node {0} is out of range")]
    NodeOutOfRange(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
