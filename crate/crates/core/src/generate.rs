//! Seeded synthetic graphs and update streams.

use std::collections::HashSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::io::EdgeList;
use crate::{GraphError, NodeId, UpdateRecord, UpdateStream, Weight};

/// Quadrant probabilities of the recursive matrix generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmatParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Default for RmatParams {
    fn default() -> Self {
        RmatParams {
            a: 0.57,
            b: 0.19,
            c: 0.19,
            d: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOptions {
    pub max_weight: Weight,
    /// Drop self-loops and repeated edges.
    pub simple: bool,
    /// Treat `(u, v)` and `(v, u)` as the same edge when `simple` is set.
    pub undirected: bool,
    pub seed: u64,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            max_weight: 100,
            simple: true,
            undirected: false,
            seed: 1,
        }
    }
}

fn key(u: NodeId, v: NodeId, undirected: bool) -> (NodeId, NodeId) {
    if undirected && v < u {
        (v, u)
    } else {
        (u, v)
    }
}

fn collect(
    node_count: usize,
    edge_count: usize,
    opts: GenOptions,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> (NodeId, NodeId),
) -> EdgeList {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(edge_count);
    let limit = edge_count.saturating_mul(20).max(1000);
    let mut attempts = 0;
    while edges.len() < edge_count && attempts < limit {
        attempts += 1;
        let (u, v) = draw(&mut rng);
        if opts.simple && (u == v || !seen.insert(key(u, v, opts.undirected))) {
            continue;
        }
        let w = rng.gen_range(1..=opts.max_weight.max(1));
        edges.push((u, v, w));
    }
    EdgeList {
        edges,
        node_count,
        weighted: true,
    }
}

/// RMAT graph on `2^scale` nodes.
pub fn rmat(scale: u32, edge_count: usize, params: RmatParams, opts: GenOptions) -> EdgeList {
    let n = 1usize << scale;
    let ab = params.a + params.b;
    let abc = ab + params.c;
    collect(n, edge_count, opts, |rng| {
        let (mut u, mut v) = (0usize, 0usize);
        for bit in (0..scale).rev() {
            let p: f64 = rng.gen();
            let (du, dv) = if p < params.a {
                (0, 0)
            } else if p < ab {
                (0, 1)
            } else if p < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            u |= du << bit;
            v |= dv << bit;
        }
        (u as NodeId, v as NodeId)
    })
}

/// Uniformly random endpoints.
pub fn uniform(node_count: usize, edge_count: usize, opts: GenOptions) -> EdgeList {
    collect(node_count, edge_count, opts, |rng| {
        (
            rng.gen_range(0..node_count) as NodeId,
            rng.gen_range(0..node_count) as NodeId,
        )
    })
}

/// Number of update records for `percent` of `edge_count` edges, rounded up.
pub fn update_count(edge_count: usize, percent: f64) -> usize {
    (percent / 100.0 * edge_count as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Samples a shuffled update stream: deletes of distinct existing edges and
/// adds of distinct non-edges without self-loops.
pub fn gen_updates(
    graph: &EdgeList,
    undirected: bool,
    percent: f64,
    add_fraction: f64,
    seed: u64,
) -> Result<UpdateStream, GraphError> {
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(GraphError::Config(format!(
            "update percent {percent} outside (0, 100]"
        )));
    }
    if !(0.0..=1.0).contains(&add_fraction) {
        return Err(GraphError::Config(format!(
            "add fraction {add_fraction} outside [0, 1]"
        )));
    }
    let total = update_count(graph.edges.len(), percent);
    let adds = (total as f64 * add_fraction).round() as usize;
    let dels = (total - adds).min(graph.edges.len());
    let n = graph.node_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(adds + dels);
    for i in index::sample(&mut rng, graph.edges.len(), dels).into_vec() {
        let (u, v, _) = graph.edges[i];
        records.push(UpdateRecord::delete(u, v));
    }
    if adds > 0 {
        if n < 2 {
            return Err(GraphError::Config("too few nodes to add edges".into()));
        }
        let mut taken: HashSet<_> = graph
            .edges
            .iter()
            .map(|&(u, v, _)| key(u, v, undirected))
            .collect();
        let max_w = graph.max_weight();
        let limit = adds.saturating_mul(50).max(10_000);
        let mut attempts = 0;
        let mut added = 0;
        while added < adds {
            attempts += 1;
            if attempts > limit {
                return Err(GraphError::Config(
                    "graph too dense to sample the requested non-edges".into(),
                ));
            }
            let u = rng.gen_range(0..n) as NodeId;
            let v = rng.gen_range(0..n) as NodeId;
            if u == v || !taken.insert(key(u, v, undirected)) {
                continue;
            }
            records.push(UpdateRecord::add(u, v, rng.gen_range(1..=max_w)));
            added += 1;
        }
    }
    records.shuffle(&mut rng);
    Ok(UpdateStream::new(records))
}
