//! Communication accounting for logical ranks.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

/// Bytes charged for reading one `(start, end)` offset pair.
pub const OFFSET_PAIR_BYTES: u64 = 16;
/// Bytes charged per adjacency record: a 4-byte target and a 4-byte weight.
pub const RECORD_BYTES: u64 = 8;
/// Bytes charged per property cell.
pub const VALUE_BYTES: u64 = 8;

/// Remote traffic issued by one rank.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankComm {
    pub remote_reads: u64,
    pub remote_accumulates: u64,
    pub bytes: u64,
}

impl RankComm {
    pub fn is_zero(&self) -> bool {
        *self == RankComm::default()
    }

    fn minus(&self, earlier: &RankComm) -> RankComm {
        RankComm {
            remote_reads: self.remote_reads - earlier.remote_reads,
            remote_accumulates: self.remote_accumulates - earlier.remote_accumulates,
            bytes: self.bytes - earlier.bytes,
        }
    }
}

/// Per-rank remote traffic, indexed by the issuing rank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    pub ranks: Vec<RankComm>,
}

impl CommStats {
    pub fn total(&self) -> RankComm {
        self.ranks.iter().fold(RankComm::default(), |a, r| RankComm {
            remote_reads: a.remote_reads + r.remote_reads,
            remote_accumulates: a.remote_accumulates + r.remote_accumulates,
            bytes: a.bytes + r.bytes,
        })
    }

    /// Traffic since `earlier`, a snapshot of the same counters.
    pub fn since(&self, earlier: &CommStats) -> CommStats {
        CommStats {
            ranks: self
                .ranks
                .iter()
                .zip(&earlier.ranks)
                .map(|(a, b)| a.minus(b))
                .collect(),
        }
    }

    /// `rank,remote_reads,remote_accumulates,bytes` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,remote_reads,remote_accumulates,bytes\n");
        for (r, c) in self.ranks.iter().enumerate() {
            out.push_str(&format!(
                "{r},{},{},{}\n",
                c.remote_reads, c.remote_accumulates, c.bytes
            ));
        }
        out
    }
}

impl fmt::Display for CommStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.total();
        write!(
            f,
            "{} remote reads, {} remote accumulates, {} bytes",
            t.remote_reads, t.remote_accumulates, t.bytes
        )
    }
}

#[derive(Debug, Default)]
pub(crate) struct Counters {
    reads: AtomicU64,
    accumulates: AtomicU64,
    bytes: AtomicU64,
}

impl Counters {
    pub fn read(&self, count: u64, bytes: u64) {
        self.reads.fetch_add(count, Ordering::Relaxed);
        self.bytes.fetch_add(bytes, Ordering::Relaxed);
    }

    pub fn accumulate(&self, count: u64, bytes: u64) {
        self.accumulates.fetch_add(count, Ordering::Relaxed);
        self.bytes.fetch_add(bytes, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> RankComm {
        RankComm {
            remote_reads: self.reads.load(Ordering::Relaxed),
            remote_accumulates: self.accumulates.load(Ordering::Relaxed),
            bytes: self.bytes.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.reads.store(0, Ordering::Relaxed);
        self.accumulates.store(0, Ordering::Relaxed);
        self.bytes.store(0, Ordering::Relaxed);
    }
}
