//! The JSON record written next to every result set.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use anyhow::Context;
use graphdyn_engine::RunStats;
use graphdyn_partition::CommStats;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchTiming {
    pub index: usize,
    pub deletes: usize,
    pub adds: usize,
    pub deletes_applied: usize,
    pub delete_misses: usize,
    pub adds_applied: usize,
    pub preprocess_ms: f64,
    pub update_ms: f64,
    pub propagate_ms: f64,
    pub merged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub function: String,
    pub line: u32,
    pub runs: u64,
    pub iterations: u64,
    pub max_iterations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub before_batches_ms: Option<f64>,
    pub static_update_ms: Option<f64>,
    pub batches: Vec<BatchTiming>,
    pub fixed_points: Vec<FixedPointRecord>,
}

impl Timings {
    pub fn new(stats: &RunStats, static_update: Option<Duration>) -> Self {
        Timings {
            total_ms: ms(stats.total),
            before_batches_ms: stats.before_batches.map(ms),
            static_update_ms: static_update.map(ms),
            batches: stats
                .batches
                .iter()
                .map(|b| BatchTiming {
                    index: b.index,
                    deletes: b.deletes,
                    adds: b.adds,
                    deletes_applied: b.deletes_applied,
                    delete_misses: b.delete_misses,
                    adds_applied: b.adds_applied,
                    preprocess_ms: ms(b.preprocess),
                    update_ms: ms(b.update),
                    propagate_ms: ms(b.propagate),
                    merged: b.merged,
                })
                .collect(),
            fixed_points: stats
                .fixed_points
                .iter()
                .map(|f| FixedPointRecord {
                    function: f.function.clone(),
                    line: f.line,
                    runs: f.runs,
                    iterations: f.iterations,
                    max_iterations: f.max_iterations,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CommRow {
    pub rank: usize,
    pub remote_reads: u64,
    pub remote_accumulates: u64,
    pub bytes: u64,
}

pub fn comm_rows(c: &CommStats) -> Vec<CommRow> {
    c.ranks
        .iter()
        .enumerate()
        .map(|(rank, r)| CommRow {
            rank,
            remote_reads: r.remote_reads,
            remote_accumulates: r.remote_accumulates,
            bytes: r.bytes,
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub settings: BTreeMap<String, serde_json::Value>,
    pub node_count: Option<usize>,
    pub edge_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comm: Vec<CommRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<serde_json::Value>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: "graphdyn",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            seed: None,
            inputs: Vec::new(),
            settings: BTreeMap::new(),
            node_count: None,
            edge_count: None,
            timings: None,
            comm: Vec::new(),
            rows: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn input_bytes(&mut self, role: &str, path: &str, bytes: &[u8]) {
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Records the digest of the file at `path`.
    pub fn input_file(&mut self, role: &str, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.input_bytes(role, &path.display().to_string(), &bytes);
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.settings
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable"));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("serializable") + "\n";
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_are_hex_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifests_serialize_with_their_inputs() {
        let mut m = Manifest::new("run");
        m.seed = Some(7);
        m.input_bytes("graph", "g.txt", b"0 1\n");
        m.set("mode", "dynamic");
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["inputs"][0]["bytes"], 4);
        assert_eq!(v["settings"]["mode"], "dynamic");
        assert!(v.get("timings").is_none());
    }
}
