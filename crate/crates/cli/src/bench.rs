//! Static recompute against dynamic maintenance over a range of update
//! percentages. Each point checks the two results agree before any time is
//! reported.

use std::time::Duration;

use graphdyn_core::generate::gen_updates;
use graphdyn_partition::RankComm;
use serde::Serialize;

use crate::run::{compare, default_keys, execute, GraphInput, Mode, Program, RunConfig, Scalars};
use crate::{usage, Failure, Result};

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub percents: Vec<f64>,
    pub add_fraction: f64,
    pub seed: u64,
    /// Records per batch; `None` puts each stream in a single batch.
    pub batch: Option<usize>,
    /// Timed repetitions per point; the fastest is kept.
    pub reps: usize,
    pub run: RunConfig,
    /// Values that must agree; by default every shared output.
    pub compare: Option<Vec<String>>,
    pub tolerance: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            percents: vec![1.0, 5.0, 10.0, 20.0],
            add_fraction: 0.5,
            seed: 1,
            batch: None,
            reps: 1,
            run: RunConfig::default(),
            compare: None,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub percent: f64,
    pub updates: usize,
    pub batch: usize,
    /// The Dynamic function's own setup before its first batch.
    pub initial_ms: f64,
    /// Update processing: everything from the first batch on.
    pub dynamic_ms: f64,
    pub preprocess_ms: f64,
    pub update_ms: f64,
    pub propagate_ms: f64,
    pub static_update_ms: f64,
    pub static_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comm: Option<CommTotals>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommTotals {
    pub remote_reads: u64,
    pub remote_accumulates: u64,
    pub bytes: u64,
}

impl From<RankComm> for CommTotals {
    fn from(c: RankComm) -> Self {
        CommTotals {
            remote_reads: c.remote_reads,
            remote_accumulates: c.remote_accumulates,
            bytes: c.bytes,
        }
    }
}

impl BenchRow {
    /// Static time including its structural updates over dynamic time.
    pub fn speedup(&self) -> f64 {
        (self.static_update_ms + self.static_ms) / self.dynamic_ms.max(1e-9)
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn bench(program: &Program, graph: &GraphInput, scalars: &Scalars, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.percents.is_empty() {
        return Err(usage("no update percentages given"));
    }
    if let Some(p) = cfg.percents.iter().find(|p| !(**p > 0.0 && **p <= 100.0)) {
        return Err(usage(format!("update percent {p} outside (0, 100]")));
    }
    program.entry(Mode::Dynamic)?;
    program.entry(Mode::Static)?;
    let mut rows = Vec::new();
    for &percent in &cfg.percents {
        let updates = gen_updates(&graph.list, graph.undirected, percent, cfg.add_fraction, cfg.seed)?;
        let batch = cfg.batch.unwrap_or(updates.len()).max(1);
        let scalars = Scalars {
            batch: Some(batch as i64),
            ..scalars.clone()
        };
        let mut best: Option<BenchRow> = None;
        for _ in 0..cfg.reps.max(1) {
            let dynamic = execute(program, graph, Some(&updates), &scalars, &cfg.run)?;
            let static_cfg = RunConfig {
                mode: Mode::Static,
                ranks: None,
                ..cfg.run.clone()
            };
            let fixed = execute(program, graph, Some(&updates), &scalars, &static_cfg)?;
            let keys = cfg
                .compare
                .clone()
                .unwrap_or_else(|| default_keys(program, &dynamic.outputs, &fixed.outputs));
            compare(&dynamic.outputs, &fixed.outputs, &keys, cfg.tolerance).map_err(|e| {
                Failure::Mismatch(format!("dynamic and static results differ at {percent}% updates: {e}"))
            })?;
            let sum = |f: fn(&graphdyn_engine::BatchStats) -> Duration| -> f64 {
                dynamic.stats.batches.iter().map(|b| ms(f(b))).sum()
            };
            let before = dynamic.stats.before_batches;
            let row = BenchRow {
                percent,
                updates: updates.len(),
                batch,
                initial_ms: before.map_or(0.0, ms),
                dynamic_ms: ms(dynamic.stats.total - before.unwrap_or_default()),
                preprocess_ms: sum(|b| b.preprocess),
                update_ms: sum(|b| b.update),
                propagate_ms: sum(|b| b.propagate),
                static_update_ms: fixed.static_update.map_or(0.0, ms),
                static_ms: ms(fixed.stats.total),
                comm: dynamic.comm.map(|c| c.total().into()),
            };
            best = match best {
                Some(b) => Some(BenchRow {
                    initial_ms: b.initial_ms.min(row.initial_ms),
                    dynamic_ms: b.dynamic_ms.min(row.dynamic_ms),
                    preprocess_ms: b.preprocess_ms.min(row.preprocess_ms),
                    update_ms: b.update_ms.min(row.update_ms),
                    propagate_ms: b.propagate_ms.min(row.propagate_ms),
                    static_update_ms: b.static_update_ms.min(row.static_update_ms),
                    static_ms: b.static_ms.min(row.static_ms),
                    ..row
                }),
                None => Some(row),
            };
        }
        rows.push(best.expect("at least one repetition"));
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let with_comm = rows.iter().any(|r| r.comm.is_some());
    let mut out = String::from(
        "percent,updates,batch,initial_ms,dynamic_ms,preprocess_ms,update_ms,propagate_ms,static_update_ms,static_ms,speedup",
    );
    if with_comm {
        out.push_str(",remote_reads,remote_accumulates,comm_bytes");
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.3}",
            r.percent,
            r.updates,
            r.batch,
            r.initial_ms,
            r.dynamic_ms,
            r.preprocess_ms,
            r.update_ms,
            r.propagate_ms,
            r.static_update_ms,
            r.static_ms,
            r.speedup()
        ));
        if with_comm {
            let c = r.comm.unwrap_or(CommTotals {
                remote_reads: 0,
                remote_accumulates: 0,
                bytes: 0,
            });
            out.push_str(&format!(",{},{},{}", c.remote_reads, c.remote_accumulates, c.bytes));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphdyn_core::generate::{uniform, GenOptions};

    fn small(undirected: bool) -> GraphInput {
        let list = uniform(
            60,
            240,
            GenOptions {
                max_weight: 9,
                simple: true,
                undirected,
                seed: 4,
            },
        );
        GraphInput::new(list, undirected, 1)
    }

    #[test]
    fn every_point_is_checked_and_timed() {
        let p = Program::load("sssp").unwrap();
        let scalars = Scalars {
            src: Some(0),
            ..Scalars::default()
        };
        let cfg = BenchConfig {
            percents: vec![1.0, 20.0],
            batch: Some(10),
            ..BenchConfig::default()
        };
        let rows = bench(&p, &small(false), &scalars, &cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].updates, 3);
        assert_eq!(rows[1].updates, 48);
        let csv = to_csv(&rows);
        assert!(csv.starts_with("percent,updates,batch,initial_ms,dynamic_ms"));
        assert!(rows.iter().all(|r| r.initial_ms > 0.0));
        assert!(!csv.contains("remote_reads"));
    }

    #[test]
    fn partitioned_runs_add_comm_columns() {
        let p = Program::load("tc").unwrap();
        let mut cfg = BenchConfig {
            percents: vec![5.0],
            ..BenchConfig::default()
        };
        cfg.run.ranks = Some(3);
        let rows = bench(&p, &small(true), &Scalars::default(), &cfg).unwrap();
        let csv = to_csv(&rows);
        assert!(csv.lines().next().unwrap().ends_with("remote_reads,remote_accumulates,comm_bytes"));
        assert!(rows[0].comm.unwrap().remote_reads > 0);
    }

    #[test]
    fn empty_percent_lists_are_rejected() {
        let p = Program::load("tc").unwrap();
        let cfg = BenchConfig {
            percents: vec![],
            ..BenchConfig::default()
        };
        let err = bench(&p, &small(true), &Scalars::default(), &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn mismatches_use_their_own_exit_code() {
        let p = Program::load("pr").unwrap();
        let scalars = Scalars {
            max_iter: 1,
            ..Scalars::default()
        };
        let cfg = BenchConfig {
            percents: vec![20.0],
            batch: Some(5),
            ..BenchConfig::default()
        };
        let err = bench(&p, &small(false), &scalars, &cfg).unwrap_err();
        assert_eq!(err.exit_code(), 4, "{err}");
    }
}
