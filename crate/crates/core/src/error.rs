use thiserror::Error;

use crate::NodeId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {reason}: `{text}`")]
    Malformed {
        line: usize,
        text: String,
        reason: String,
    },

    #[error("line {line}: node {node} out of range for {node_count} nodes")]
    NodeOutOfRange {
        line: usize,
        node: NodeId,
        node_count: usize,
    },

    #[error("update #{index} `{record}`: node {node} out of range for {node_count} nodes")]
    UpdateOutOfRange {
        index: usize,
        record: String,
        node: NodeId,
        node_count: usize,
    },

    #[error("negative weight {weight} on edge {from} -> {target}")]
    NegativeWeight {
        from: NodeId,
        target: NodeId,
        weight: i32,
    },

    #[error("node count {0} exceeds the addressable range")]
    TooManyNodes(usize),

    #[error("reverse adjacency was not enabled when the graph was built")]
    NoReverse,

    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
