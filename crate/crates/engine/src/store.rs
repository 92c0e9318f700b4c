//! Property tables: one atomic cell per node or per edge slot.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use graphdyn_core::SlotRemap;
use parking_lot::RwLock;
use rayon::prelude::*;

use crate::value::{Kind, Value};

const PAR_FILL: usize = 1 << 15;

enum Cells {
    /// Node properties never change length.
    Fixed(Box<[AtomicU64]>),
    /// Edge properties follow the slot space, which grows on insertion and
    /// is renumbered on merge.
    Growable(RwLock<Vec<AtomicU64>>),
}

pub struct PropertyTable {
    kind: Kind,
    edge: bool,
    cells: Cells,
    pub(crate) companion: OnceLock<Arc<PropertyTable>>,
}

fn fresh(len: usize, bits: u64) -> Vec<AtomicU64> {
    (0..len).map(|_| AtomicU64::new(bits)).collect()
}

impl PropertyTable {
    pub fn new(kind: Kind, edge: bool, len: usize) -> Self {
        let cells = fresh(len, kind.zero().to_bits());
        PropertyTable {
            kind,
            edge,
            cells: if edge {
                Cells::Growable(RwLock::new(cells))
            } else {
                Cells::Fixed(cells.into_boxed_slice())
            },
            companion: OnceLock::new(),
        }
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_edge(&self) -> bool {
        self.edge
    }

    pub fn len(&self) -> usize {
        match &self.cells {
            Cells::Fixed(c) => c.len(),
            Cells::Growable(c) => c.read().len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Runs `f` on cell `i`, or returns `None` when out of range.
    pub fn with_cell<R>(&self, i: usize, f: impl FnOnce(&AtomicU64) -> R) -> Option<R> {
        match &self.cells {
            Cells::Fixed(c) => c.get(i).map(f),
            Cells::Growable(c) => c.read().get(i).map(f),
        }
    }

    pub fn get(&self, i: usize) -> Option<Value> {
        self.with_cell(i, |c| Value::from_bits(self.kind, c.load(Ordering::Relaxed)))
    }

    pub fn set(&self, i: usize, v: Value) -> bool {
        self.with_cell(i, |c| c.store(v.to_bits(), Ordering::Relaxed))
            .is_some()
    }

    fn each(&self, f: impl Fn(usize, &AtomicU64) + Sync) {
        let run = |c: &[AtomicU64]| {
            if c.len() >= PAR_FILL {
                c.par_iter().enumerate().for_each(|(i, x)| f(i, x));
            } else {
                c.iter().enumerate().for_each(|(i, x)| f(i, x));
            }
        };
        match &self.cells {
            Cells::Fixed(c) => run(c),
            Cells::Growable(c) => run(&c.read()),
        }
    }

    pub fn fill(&self, v: Value) {
        let bits = v.to_bits();
        self.each(|_, c| c.store(bits, Ordering::Relaxed));
    }

    pub fn snapshot(&self) -> Vec<Value> {
        let k = self.kind;
        let read = |c: &[AtomicU64]| {
            c.iter()
                .map(|x| Value::from_bits(k, x.load(Ordering::Relaxed)))
                .collect()
        };
        match &self.cells {
            Cells::Fixed(c) => read(c),
            Cells::Growable(c) => read(&c.read()),
        }
    }

    pub fn any_true(&self) -> bool {
        let test = |c: &[AtomicU64]| c.iter().any(|x| x.load(Ordering::Relaxed) != 0);
        match &self.cells {
            Cells::Fixed(c) => test(c),
            Cells::Growable(c) => test(&c.read()),
        }
    }

    /// Copies every element of `other` into this table.
    pub fn copy_from(&self, other: &PropertyTable) {
        if std::ptr::eq(self, other) {
            return;
        }
        let src = other.snapshot();
        self.each(|i, c| {
            if let Some(v) = src.get(i) {
                c.store(v.to_bits(), Ordering::Relaxed)
            }
        });
    }

    /// `self := next; next := default`, the step between two `fixedPoint`
    /// iterations.
    pub fn advance_from(&self, next: &PropertyTable) {
        let zero = next.kind.zero().to_bits();
        let take = |a: &[AtomicU64], b: &[AtomicU64]| {
            let step = |(x, y): (&AtomicU64, &AtomicU64)| {
                x.store(y.swap(zero, Ordering::Relaxed), Ordering::Relaxed);
            };
            if a.len() >= PAR_FILL {
                a.par_iter().zip(b).for_each(step);
            } else {
                a.iter().zip(b).for_each(step);
            }
        };
        match (&self.cells, &next.cells) {
            (Cells::Fixed(a), Cells::Fixed(b)) => take(a, b),
            (Cells::Growable(a), Cells::Growable(b)) => take(&a.read(), &b.read()),
            _ => unreachable!("companion tables share their base's shape"),
        }
    }

    /// Extends an edge table to `len` slots and clears the freshly claimed
    /// ones.
    pub fn grow(&self, len: usize, claimed: &[usize]) {
        let Cells::Growable(c) = &self.cells else {
            return;
        };
        let zero = self.kind.zero().to_bits();
        let mut c = c.write();
        while c.len() < len {
            c.push(AtomicU64::new(zero));
        }
        for &s in claimed {
            if let Some(x) = c.get(s) {
                x.store(zero, Ordering::Relaxed);
            }
        }
    }

    /// Moves edge values to their post-merge slots.
    pub fn remap(&self, remap: &SlotRemap) {
        let Cells::Growable(c) = &self.cells else {
            return;
        };
        let mut c = c.write();
        let old: Vec<u64> = c.iter().map(|x| x.load(Ordering::Relaxed)).collect();
        let moved = remap.apply(&old, self.kind.zero().to_bits());
        *c = moved.into_iter().map(AtomicU64::new).collect();
    }
}

impl std::fmt::Debug for PropertyTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PropertyTable")
            .field("kind", &self.kind)
            .field("edge", &self.edge)
            .field("len", &self.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advance_moves_and_clears() {
        let a = PropertyTable::new(Kind::Bool, false, 4);
        let b = PropertyTable::new(Kind::Bool, false, 4);
        a.set(0, Value::Bool(true));
        b.set(2, Value::Bool(true));
        a.advance_from(&b);
        assert_eq!(
            a.snapshot(),
            vec![false, false, true, false]
                .into_iter()
                .map(Value::Bool)
                .collect::<Vec<_>>()
        );
        assert!(!b.any_true());
    }

    #[test]
    fn edge_tables_grow_and_remap() {
        let t = PropertyTable::new(Kind::Int, true, 2);
        t.set(0, Value::Int(5));
        t.set(1, Value::Int(6));
        t.grow(4, &[1, 3]);
        assert_eq!(t.get(1), Some(Value::Int(0)));
        t.set(3, Value::Int(9));
        t.remap(&SlotRemap::new(vec![1, usize::MAX, usize::MAX, 0], 2));
        assert_eq!(t.snapshot(), vec![Value::Int(9), Value::Int(5)]);
    }
}
