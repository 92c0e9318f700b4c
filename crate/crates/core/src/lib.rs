//! Dynamic graph storage: a main CSR plus a chain of diff-CSR deltas.
//!
//! Deletions overwrite a coordinate cell with [`SENTINEL`]; insertions first
//! reuse a vacancy in the source's existing segments and otherwise land in a
//! freshly appended delta. Deltas are folded back into the main CSR every
//! `merge_interval` batches.

mod csr;
mod error;
mod graph;
pub mod generate;
pub mod io;
mod update;

pub use csr::{Csr, DiffCsr};
pub use error::GraphError;
pub use graph::{
    AddReport, Adjacency, DeleteReport, DynamicGraph, EdgeRef, GraphOptions, Neighbors, Slot,
    SlotRemap,
};
pub use update::{UpdateBatch, UpdateKind, UpdateRecord, UpdateStream};

/// Node identifier. `u32::MAX` is reserved for [`SENTINEL`].
pub type NodeId = u32;

/// Integer edge weight. Unweighted graphs report weight 1 for every edge.
pub type Weight = i32;

/// Marker stored in a coordinate cell whose edge has been deleted.
pub const SENTINEL: NodeId = NodeId::MAX;
