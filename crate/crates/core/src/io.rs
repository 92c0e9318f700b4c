//! Plain-text graph files: one `src dst [weight]` edge per line, `#` comments.

use std::fs;
use std::path::Path;

use crate::update::{parse_node, strip_comment};
use crate::{GraphError, NodeId, UpdateStream, Weight};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub edges: Vec<(NodeId, NodeId, Weight)>,
    /// `1 + max id` seen in the file, or 0 for an empty file.
    pub node_count: usize,
    /// True if any line carried a weight column.
    pub weighted: bool,
}

impl EdgeList {
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut list = EdgeList::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let bad = |why: String| GraphError::Malformed {
                line: lineno + 1,
                text: raw.to_string(),
                reason: why,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(bad(format!("expected 2 or 3 fields, found {}", fields.len())));
            }
            let src = parse_node(fields[0]).ok_or_else(|| bad("bad source".into()))?;
            let dst = parse_node(fields[1]).ok_or_else(|| bad("bad destination".into()))?;
            let weight = match fields.get(2) {
                Some(w) => {
                    list.weighted = true;
                    let w: Weight = w.parse().map_err(|_| bad(format!("bad weight `{w}`")))?;
                    if w < 0 {
                        return Err(bad("negative weight".into()));
                    }
                    w
                }
                None => 1,
            };
            list.node_count = list.node_count.max(src.max(dst) as usize + 1);
            list.edges.push((src, dst, weight));
        }
        Ok(list)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 12);
        for &(u, v, w) in &self.edges {
            if self.weighted {
                out.push_str(&format!("{u} {v} {w}\n"));
            } else {
                out.push_str(&format!("{u} {v}\n"));
            }
        }
        out
    }

    /// Largest weight in the list, at least 1.
    pub fn max_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.2).max().unwrap_or(1).max(1)
    }
}

pub fn read_updates(path: impl AsRef<Path>) -> Result<UpdateStream, GraphError> {
    UpdateStream::parse(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_weighted_and_unweighted_lines() {
        let l = EdgeList::parse("# g\n0 1 4\n2 0\n").unwrap();
        assert_eq!(l.edges, vec![(0, 1, 4), (2, 0, 1)]);
        assert_eq!(l.node_count, 3);
        assert!(l.weighted);
        assert_eq!(EdgeList::parse(&l.to_text()).unwrap(), l);
    }

    #[test]
    fn malformed_line_is_located() {
        match EdgeList::parse("0 1\n0 x\n").unwrap_err() {
            GraphError::Malformed { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn empty_file_has_no_nodes() {
        let l = EdgeList::parse("# nothing\n").unwrap();
        assert_eq!(l.node_count, 0);
        assert!(l.edges.is_empty());
    }
}
