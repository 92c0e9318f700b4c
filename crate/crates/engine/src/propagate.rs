//! Flag propagation over weakly connected components.

use std::sync::atomic::Ordering;

use graphdyn_core::{GraphError, NodeId};
use rayon::prelude::*;

use crate::store::PropertyTable;
use crate::topology::Topology;
use crate::value::{Kind, Value};

fn claim(flags: &PropertyTable, v: NodeId) -> bool {
    flags
        .with_cell(v as usize, |c| {
            c.compare_exchange(0, 1, Ordering::Relaxed, Ordering::Relaxed)
                .is_ok()
        })
        .unwrap_or(false)
}

/// Sets the flag of every node weakly connected to a flagged node, one BFS
/// level at a time. Returns the number of levels expanded.
pub(crate) fn propagate_table<G: Topology>(
    g: &G,
    flags: &PropertyTable,
    parallel: bool,
) -> Result<usize, GraphError> {
    let n = g.node_count();
    let mut frontier: Vec<NodeId> = (0..n as NodeId)
        .filter(|&v| flags.get(v as usize).is_some_and(|x| x.as_bool()))
        .collect();
    let mut levels = 0;
    while !frontier.is_empty() {
        let expand = |&v: &NodeId| -> Result<Vec<NodeId>, GraphError> {
            let mut out = Vec::new();
            for e in g.out_edges(Some(v), v) {
                if claim(flags, e.target) {
                    out.push(e.target);
                }
            }
            if g.is_directed() {
                for e in g.in_edges(Some(v), v)? {
                    if claim(flags, e.source) {
                        out.push(e.source);
                    }
                }
            }
            Ok(out)
        };
        let next: Result<Vec<Vec<NodeId>>, GraphError> = if parallel {
            frontier.par_iter().map(expand).collect()
        } else {
            frontier.iter().map(expand).collect()
        };
        frontier = next?.concat();
        frontier.sort_unstable();
        levels += 1;
    }
    Ok(levels)
}

/// Extends `flags` to the weakly connected closure of the flagged nodes.
/// Directed graphs need reverse adjacency.
pub fn propagate_node_flags<G: Topology>(g: &G, flags: &mut [bool]) -> Result<(), GraphError> {
    let t = PropertyTable::new(Kind::Bool, false, flags.len());
    for (i, &f) in flags.iter().enumerate() {
        t.set(i, Value::Bool(f));
    }
    propagate_table(g, &t, true)?;
    for (i, f) in flags.iter_mut().enumerate() {
        *f = t.get(i).is_some_and(|x| x.as_bool());
    }
    Ok(())
}
