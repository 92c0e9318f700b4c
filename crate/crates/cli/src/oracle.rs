//! `graphdyn oracle`: the sequential reference algorithms on a graph file,
//! after replaying an optional update stream.

use std::fmt;
use std::str::FromStr;

use graphdyn_core::io::EdgeList;
use graphdyn_core::UpdateStream;
use graphdyn_oracle::{Op, Replay};

use crate::{usage, Result};

/// Distance written for unreachable nodes, as the engine writes `INF`.
pub const UNREACHABLE: i64 = i32::MAX as i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Sssp,
    Pr,
    Tc,
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sssp" => Ok(Algo::Sssp),
            "pr" | "pagerank" => Ok(Algo::Pr),
            "tc" | "triangles" => Ok(Algo::Tc),
            _ => Err(format!("unknown algorithm `{s}` (expected sssp, pr or tc)")),
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Sssp => "sssp",
            Algo::Pr => "pr",
            Algo::Tc => "tc",
        })
    }
}

#[derive(Debug, Clone)]
pub struct OracleArgs {
    pub algo: Algo,
    /// Triangle counting always treats the graph as undirected.
    pub undirected: bool,
    pub src: Option<u32>,
    pub damping: f64,
    pub beta: f64,
    pub max_iter: usize,
    pub batch: Option<usize>,
}

/// Edge list after applying `updates` batch by batch, deletes first.
pub fn replay(list: &EdgeList, directed: bool, updates: Option<&UpdateStream>, batch: Option<usize>) -> Vec<(u32, u32, i64)> {
    let edges: Vec<_> = list.edges.iter().map(|&(u, v, w)| (u, v, w as i64)).collect();
    let Some(updates) = updates else {
        return edges;
    };
    let mut r = Replay::new(&edges, directed);
    for chunk in updates.records().chunks(batch.unwrap_or(updates.len()).max(1)) {
        for u in chunk.iter().filter(|u| u.is_delete()) {
            r.apply(Op::Delete(u.source, u.destination));
        }
        for u in chunk.iter().filter(|u| u.is_add()) {
            r.apply(Op::Add(u.source, u.destination, u.weight as i64));
        }
    }
    r.edges()
}

/// Runs the oracle and renders its result in the engine's CSV layout.
pub fn run(list: &EdgeList, updates: Option<&UpdateStream>, a: &OracleArgs) -> Result<String> {
    let n = list.node_count;
    let directed = !a.undirected && a.algo != Algo::Tc;
    let edges = replay(list, directed, updates, a.batch);
    let mut out = String::new();
    match a.algo {
        Algo::Sssp => {
            let src = a.src.ok_or_else(|| usage("missing --src"))?;
            if src as usize >= n {
                return Err(usage(format!("--src {src} is not a node of the graph")));
            }
            out.push_str("node,value\n");
            for (v, d) in graphdyn_oracle::sssp(n, &edges, directed, src)?.iter().enumerate() {
                out.push_str(&format!("{v},{}\n", d.unwrap_or(UNREACHABLE)));
            }
        }
        Algo::Pr => {
            if !(a.damping > 0.0 && a.damping < 1.0) {
                return Err(usage("--damping must lie in (0, 1)"));
            }
            let (ranks, _) = graphdyn_oracle::pagerank(n, &edges, a.damping, a.beta, a.max_iter);
            out.push_str("node,value\n");
            for (v, r) in ranks.iter().enumerate() {
                out.push_str(&format!("{v},{r}\n"));
            }
        }
        Algo::Tc => {
            out.push_str(&format!("name,value\nreturn,{}\n", graphdyn_oracle::triangles(n, &edges)));
        }
    }
    Ok(out)
}
