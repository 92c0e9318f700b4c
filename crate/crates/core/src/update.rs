use std::fmt;

use crate::{GraphError, NodeId, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UpdateKind {
    Add,
    Delete,
}

/// One edge insertion or deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UpdateRecord {
    pub kind: UpdateKind,
    pub source: NodeId,
    pub destination: NodeId,
    pub weight: Weight,
}

impl UpdateRecord {
    pub fn add(source: NodeId, destination: NodeId, weight: Weight) -> Self {
        UpdateRecord {
            kind: UpdateKind::Add,
            source,
            destination,
            weight,
        }
    }

    pub fn delete(source: NodeId, destination: NodeId) -> Self {
        UpdateRecord {
            kind: UpdateKind::Delete,
            source,
            destination,
            weight: 0,
        }
    }

    pub fn is_add(&self) -> bool {
        self.kind == UpdateKind::Add
    }

    pub fn is_delete(&self) -> bool {
        self.kind == UpdateKind::Delete
    }
}

impl fmt::Display for UpdateRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            UpdateKind::Add => write!(f, "a {} {} {}", self.source, self.destination, self.weight),
            UpdateKind::Delete => write!(f, "d {} {}", self.source, self.destination),
        }
    }
}

/// An ordered window of update records processed as one unit.
#[derive(Debug, Clone, Copy)]
pub struct UpdateBatch<'a> {
    records: &'a [UpdateRecord],
}

impl<'a> UpdateBatch<'a> {
    pub fn new(records: &'a [UpdateRecord]) -> Self {
        UpdateBatch { records }
    }

    pub fn records(&self) -> &'a [UpdateRecord] {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn deletes(&self) -> impl Iterator<Item = &'a UpdateRecord> + 'a {
        self.records.iter().filter(|r| r.is_delete())
    }

    pub fn adds(&self) -> impl Iterator<Item = &'a UpdateRecord> + 'a {
        self.records.iter().filter(|r| r.is_add())
    }
}

/// The full update sequence of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateStream {
    records: Vec<UpdateRecord>,
}

impl UpdateStream {
    pub fn new(records: Vec<UpdateRecord>) -> Self {
        UpdateStream { records }
    }

    pub fn records(&self) -> &[UpdateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Consecutive windows of `batch_size` records. The last window may be short.
    pub fn batches(&self, batch_size: usize) -> impl Iterator<Item = UpdateBatch<'_>> {
        self.records
            .chunks(batch_size.max(1))
            .map(UpdateBatch::new)
    }

    /// Checks every endpoint against `node_count`.
    pub fn validate(&self, node_count: usize) -> Result<(), GraphError> {
        for (i, r) in self.records.iter().enumerate() {
            for node in [r.source, r.destination] {
                if node as usize >= node_count {
                    return Err(GraphError::UpdateOutOfRange {
                        index: i,
                        record: r.to_string(),
                        node,
                        node_count,
                    });
                }
            }
        }
        Ok(())
    }

    /// Parses the `a <src> <dst> <weight>` / `d <src> <dst>` text format.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut records = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| GraphError::Malformed {
                line: lineno + 1,
                text: raw.to_string(),
                reason: why.to_string(),
            };
            let mut fields = line.split_whitespace();
            let tag = fields.next().ok_or_else(|| bad("empty record"))?;
            let mut node = |name: &str| -> Result<NodeId, GraphError> {
                let f = fields
                    .next()
                    .ok_or_else(|| bad(&format!("missing {name}")))?;
                parse_node(f).ok_or_else(|| bad(&format!("bad {name} `{f}`")))
            };
            let src = node("source")?;
            let dst = node("destination")?;
            let record = match tag {
                "a" => {
                    let weight = match fields.next() {
                        Some(w) => w
                            .parse::<Weight>()
                            .map_err(|_| bad(&format!("bad weight `{w}`")))?,
                        None => 1,
                    };
                    UpdateRecord::add(src, dst, weight)
                }
                "d" => UpdateRecord::delete(src, dst),
                other => return Err(bad(&format!("unknown record tag `{other}`"))),
            };
            if fields.next().is_some() {
                return Err(bad("trailing fields"));
            }
            records.push(record);
        }
        Ok(UpdateStream { records })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 16);
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => line[..i].trim(),
        None => line.trim(),
    }
}

pub(crate) fn parse_node(field: &str) -> Option<NodeId> {
    let v: u64 = field.parse().ok()?;
    // the maximum id is reserved for the sentinel
    (v < crate::SENTINEL as u64).then_some(v as NodeId)
}
