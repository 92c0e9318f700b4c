//! Plain sequential reference algorithms.
//!
//! Nothing here shares code with the crates under test: graphs are taken as
//! bare edge lists and every routine is the textbook version.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("negative weight {weight} on edge {from} -> {to}")]
    NegativeWeight { from: u32, to: u32, weight: i64 },
    #[error("node {0} out of range")]
    OutOfRange(u32),
}

/// A weighted edge `(from, to, weight)`.
pub type Edge = (u32, u32, i64);

fn out_lists(n: usize, edges: &[Edge], directed: bool) -> Vec<Vec<(u32, i64)>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        adj[u as usize].push((v, w));
        if !directed && u != v {
            adj[v as usize].push((u, w));
        }
    }
    adj
}

/// Dijkstra. `None` marks unreachable nodes.
pub fn sssp(
    n: usize,
    edges: &[Edge],
    directed: bool,
    src: u32,
) -> Result<Vec<Option<i64>>, OracleError> {
    for &(u, v, w) in edges {
        if w < 0 {
            return Err(OracleError::NegativeWeight {
                from: u,
                to: v,
                weight: w,
            });
        }
        if u as usize >= n || v as usize >= n {
            return Err(OracleError::OutOfRange(u.max(v)));
        }
    }
    if src as usize >= n {
        return Err(OracleError::OutOfRange(src));
    }
    let adj = out_lists(n, edges, directed);
    let mut dist: Vec<Option<i64>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = Some(0);
    heap.push(Reverse((0i64, src)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize] != Some(d) {
            continue;
        }
        for &(v, w) in &adj[u as usize] {
            let nd = d + w;
            if dist[v as usize].map_or(true, |cur| nd < cur) {
                dist[v as usize] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    Ok(dist)
}

/// Power iteration with uniform redistribution of dangling mass. Stops when
/// the largest per-node change drops below `beta` or after `max_iter`
/// sweeps. Returns the ranks and the number of sweeps.
pub fn pagerank(
    n: usize,
    edges: &[Edge],
    damping: f64,
    beta: f64,
    max_iter: usize,
) -> (Vec<f64>, usize) {
    if n == 0 {
        return (Vec::new(), 0);
    }
    let mut outdeg = vec![0usize; n];
    let mut incoming = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        outdeg[u as usize] += 1;
        incoming[v as usize].push(u as usize);
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut sweeps = 0;
    while sweeps < max_iter {
        sweeps += 1;
        let dangling: f64 = (0..n).filter(|&u| outdeg[u] == 0).map(|u| rank[u]).sum();
        let mut next = vec![0.0; n];
        for v in 0..n {
            let s: f64 = incoming[v]
                .iter()
                .map(|&u| rank[u] / outdeg[u] as f64)
                .sum();
            next[v] = (1.0 - damping) / nf + damping * (s + dangling / nf);
        }
        let delta = next
            .iter()
            .zip(&rank)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rank = next;
        if delta < beta {
            break;
        }
    }
    (rank, sweeps)
}

/// Triangles of the simple undirected graph underlying `edges`.
pub fn triangles(n: usize, edges: &[Edge]) -> u64 {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        if u != v {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let mut count = 0;
    for u in 0..n {
        for &v in adj[u].iter().filter(|&&v| v as usize > u) {
            let (a, b) = (&adj[u], &adj[v as usize]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if a[i] > v {
                            count += 1;
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    count
}

/// Nodes reachable from any seed, ignoring edge direction.
pub fn reachable_undirected(n: usize, edges: &[Edge], seeds: &[u32]) -> Vec<bool> {
    let adj = out_lists(n, edges, false);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s as usize] {
            seen[s as usize] = true;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adj[u as usize] {
            if !seen[v as usize] {
                seen[v as usize] = true;
                queue.push_back(v);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add(u32, u32, i64),
    Delete(u32, u32),
}

/// Hash-multimap adjacency replayed op by op.
#[derive(Debug, Clone, Default)]
pub struct Replay {
    directed: bool,
    adj: HashMap<u32, Vec<(u32, i64)>>,
}

impl Replay {
    pub fn new(edges: &[Edge], directed: bool) -> Self {
        let mut r = Replay {
            directed,
            adj: HashMap::new(),
        };
        for &(u, v, w) in edges {
            r.apply(Op::Add(u, v, w));
        }
        r
    }

    fn remove(&mut self, u: u32, v: u32) -> bool {
        match self.adj.get_mut(&u) {
            Some(list) => match list.iter().position(|&(t, _)| t == v) {
                Some(i) => {
                    list.remove(i);
                    true
                }
                None => false,
            },
            None => false,
        }
    }

    /// Returns false for a delete that matched nothing.
    pub fn apply(&mut self, op: Op) -> bool {
        match op {
            Op::Add(u, v, w) => {
                self.adj.entry(u).or_default().push((v, w));
                if !self.directed && u != v {
                    self.adj.entry(v).or_default().push((u, w));
                }
                true
            }
            Op::Delete(u, v) => {
                let hit = self.remove(u, v);
                if hit && !self.directed && u != v {
                    self.remove(v, u);
                }
                hit
            }
        }
    }

    /// Sorted neighbor targets of `u`, with multiplicity.
    pub fn targets(&self, u: u32) -> Vec<u32> {
        let mut t: Vec<u32> = self
            .adj
            .get(&u)
            .map(|l| l.iter().map(|e| e.0).collect())
            .unwrap_or_default();
        t.sort_unstable();
        t
    }

    /// Sorted `(target, weight)` pairs of `u`.
    pub fn edges_of(&self, u: u32) -> Vec<(u32, i64)> {
        let mut t = self.adj.get(&u).cloned().unwrap_or_default();
        t.sort_unstable();
        t
    }

    /// Logical edge list; undirected edges appear once with `from <= to`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        let mut keys: Vec<_> = self.adj.keys().copied().collect();
        keys.sort_unstable();
        for u in keys {
            for (v, w) in self.edges_of(u) {
                if self.directed || u <= v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn arc_count(&self) -> usize {
        self.adj.values().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dijkstra_source_only() {
        assert_eq!(sssp(1, &[], true, 0).unwrap(), vec![Some(0)]);
    }

    #[test]
    fn dijkstra_rejects_negative() {
        assert!(sssp(2, &[(0, 1, -1)], true, 0).is_err());
    }

    #[test]
    fn worked_example_after_updates() {
        // s u v w x y, after deleting x->y and adding u->v
        let edges = [(0, 1, 30), (0, 2, 48), (2, 3, 4), (0, 4, 40), (3, 5, 6), (1, 2, 10)];
        let d = sssp(6, &edges, true, 0).unwrap();
        assert_eq!(d[2], Some(40));
        assert_eq!(d[3], Some(44));
        assert_eq!(d[5], Some(50));
    }

    #[test]
    fn two_cycle_ranks_are_equal() {
        let (r, _) = pagerank(2, &[(0, 1, 1), (1, 0, 1)], 0.85, 1e-12, 1000);
        assert!((r[0] - 0.5).abs() < 1e-9 && (r[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn star_center_dominates() {
        let edges: Vec<_> = (1..6).map(|i| (i, 0, 1)).collect();
        let (r, _) = pagerank(6, &edges, 0.85, 1e-10, 1000);
        assert!(r[1..].iter().all(|&x| r[0] > x));
    }

    #[test]
    fn clique_triangles() {
        assert_eq!(triangles(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]), 1);
        let k4: Vec<_> = (0..4u32)
            .flat_map(|a| (a + 1..4).map(move |b| (a, b, 1)))
            .collect();
        assert_eq!(triangles(4, &k4), 4);
        let dup = [(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 0, 1), (2, 2, 1)];
        assert_eq!(triangles(3, &dup), 1);
    }

    #[test]
    fn replay_removes_one_occurrence() {
        let mut r = Replay::new(&[(0, 1, 1), (0, 1, 1)], true);
        assert!(r.apply(Op::Delete(0, 1)));
        assert_eq!(r.targets(0), vec![1]);
        assert!(!r.apply(Op::Delete(1, 0)));
    }

    #[test]
    fn reach_ignores_direction() {
        let seen = reachable_undirected(4, &[(1, 0, 1), (2, 3, 1)], &[0]);
        assert_eq!(seen, vec![true, true, false, false]);
    }
}
