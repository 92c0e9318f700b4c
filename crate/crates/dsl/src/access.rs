//! Data-race analysis of parallel loop bodies.
//!
//! Two iterations of a parallel loop may write the same location unless the
//! write is indexed by the loop variable itself. Every other write to a
//! property or to a variable shared across iterations is flagged, along with
//! the synchronization its statement form implies.

use std::collections::{BTreeSet, HashMap};

use crate::ast::*;
use crate::types::{Access, BindingId, SymbolTable};

/// How a flagged write is made safe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sync {
    /// Plain store; needs an atomic or a lock.
    Atomic,
    /// `+=`, `-=` or `++` on shared data.
    Reduction,
    /// `Min`/`Max`, atomic by construction.
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StmtAccess {
    pub sync: Sync,
    /// Names of the contended locations.
    pub locations: Vec<String>,
}

impl StmtAccess {
    /// Whether the statement form already provides the needed atomicity.
    pub fn satisfied(&self) -> bool {
        self.sync != Sync::Atomic
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopAccess {
    pub stmt: StmtId,
    pub function: String,
    pub reads: BTreeSet<String>,
    pub writes: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AccessSummary {
    /// One entry per parallel region: `forall`, `OnAdd` and `OnDelete`.
    pub loops: Vec<LoopAccess>,
    /// Statements with a potentially contended write.
    pub flagged: HashMap<StmtId, StmtAccess>,
}

impl AccessSummary {
    pub fn needs_atomic(&self, stmt: StmtId) -> bool {
        self.flagged.contains_key(&stmt)
    }

    pub fn sync(&self, stmt: StmtId) -> Option<Sync> {
        self.flagged.get(&stmt).map(|a| a.sync)
    }
}

pub fn analyze_access(program: &Program, table: &SymbolTable) -> AccessSummary {
    let mut a = Analyzer {
        table,
        summary: AccessSummary::default(),
        function: String::new(),
    };
    for f in &program.functions {
        a.function = f.name.clone();
        a.block(&f.body, None);
    }
    a.summary
}

struct Analyzer<'t> {
    table: &'t SymbolTable,
    summary: AccessSummary,
    function: String,
}

struct Region {
    var: Option<BindingId>,
    index: usize,
}

impl<'t> Analyzer<'t> {
    fn block(&mut self, b: &Block, region: Option<&Region>) {
        for s in &b.stmts {
            self.stmt(s, region);
        }
    }

    fn open(&mut self, s: &Stmt, body: &Block, outer: Option<&Region>) {
        if outer.is_some() {
            self.block(body, outer);
            return;
        }
        self.summary.loops.push(LoopAccess {
            stmt: s.id,
            function: self.function.clone(),
            reads: BTreeSet::new(),
            writes: BTreeSet::new(),
        });
        let region = Region {
            var: self.table.stmt_bindings.get(&s.id).copied(),
            index: self.summary.loops.len() - 1,
        };
        for e in s.kind.exprs() {
            self.reads(e, Some(&region));
        }
        self.block(body, Some(&region));
    }

    fn stmt(&mut self, s: &Stmt, region: Option<&Region>) {
        match &s.kind {
            StmtKind::ForAll {
                body, parallel: true, ..
            } => return self.open(s, body, region),
            StmtKind::OnAdd { body, .. } | StmtKind::OnDelete { body, .. } => {
                return self.open(s, body, region)
            }
            _ => {}
        }
        for e in s.kind.exprs() {
            self.reads(e, region);
        }
        if let Some(r) = region {
            match &s.kind {
                StmtKind::Assign { target, op, .. } => {
                    let sync = match op {
                        AssignOp::Set => Sync::Atomic,
                        _ => Sync::Reduction,
                    };
                    self.write(s.id, target, sync, r);
                }
                StmtKind::MinMax { targets, .. } => {
                    for t in targets {
                        self.write(s.id, t, Sync::MinMax, r);
                    }
                }
                StmtKind::Decl { .. } => {
                    if let Some(&id) = self.table.decls.get(&s.id) {
                        let name = self.table.binding(id).name.clone();
                        self.summary.loops[r.index].writes.insert(name);
                    }
                }
                _ => {}
            }
        }
        for b in s.kind.blocks() {
            self.block(b, region);
        }
    }

    fn reads(&mut self, e: &Expr, region: Option<&Region>) {
        let Some(r) = region else { return };
        e.walk(&mut |x| {
            if let Some(name) = self.location_name(x) {
                self.summary.loops[r.index].reads.insert(name);
            }
        });
    }

    fn location_name(&self, e: &Expr) -> Option<String> {
        match self.table.accesses.get(&e.id) {
            Some(
                Access::NodeProp(id)
                | Access::EdgeProp(id)
                | Access::LoopVarProp(id)
                | Access::AnyNode(id),
            ) => Some(self.table.binding(*id).name.clone()),
            Some(_) => None,
            None => self
                .table
                .names
                .get(&e.id)
                .map(|id| self.table.binding(*id).name.clone()),
        }
    }

    fn write(&mut self, stmt: StmtId, target: &Expr, sync: Sync, r: &Region) {
        let contended = match &target.kind {
            ExprKind::Field(recv, _) => {
                let own = match (recv.as_ident(), r.var) {
                    (Some(_), Some(var)) => self.table.names.get(&recv.id) == Some(&var),
                    _ => false,
                };
                !own
            }
            ExprKind::Ident(_) => match self.table.names.get(&target.id) {
                Some(&id) => {
                    let b = self.table.binding(id);
                    b.ty.is_property() || !b.private
                }
                None => true,
            },
            _ => true,
        };
        let Some(name) = self.location_name(target) else {
            return;
        };
        self.summary.loops[r.index].writes.insert(name.clone());
        if contended {
            let entry = self.summary.flagged.entry(stmt).or_insert(StmtAccess {
                sync,
                locations: Vec::new(),
            });
            if !entry.locations.contains(&name) {
                entry.locations.push(name);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::types::typecheck;

    fn analyze(src: &str) -> (Program, AccessSummary) {
        let p = parse_source(src).unwrap();
        let t = typecheck(&p).unwrap();
        let s = analyze_access(&p, &t);
        (p, s)
    }

    fn stmt_named<'a>(p: &'a Program, name: &str) -> Vec<&'a Stmt> {
        let mut out = Vec::new();
        for f in &p.functions {
            f.body.walk(&mut |s| {
                if s.kind.name() == name {
                    out.push(s)
                }
            });
        }
        out
    }

    #[test]
    fn neighbor_min_is_flagged_and_satisfied() {
        let (p, s) = analyze(
            "function f(Graph g, propNode<int> dist, propNode<bool> modified) { \
               forall (v in g.nodes()) { for (nbr in g.neighbors(v)) { \
                 Min(nbr.dist, nbr.modified; v.dist + 1, True); } } }",
        );
        let min = stmt_named(&p, "MinAssign")[0];
        let a = &s.flagged[&min.id];
        assert_eq!(a.sync, Sync::MinMax);
        assert!(a.satisfied());
        assert_eq!(a.locations, vec!["dist".to_string(), "modified".to_string()]);
    }

    #[test]
    fn own_element_write_is_not_flagged() {
        let (_, s) = analyze(
            "function f(Graph g, propNode<bool> modified) { \
               forall (v in g.nodes()) { v.modified_nxt = True; } }",
        );
        assert!(s.flagged.is_empty());
        assert!(s.loops[0].writes.contains("modified_nxt"));
    }

    #[test]
    fn shared_counter_is_a_reduction() {
        let (p, s) = analyze(
            "function f(Graph g) { long count = 0; \
               forall (v in g.nodes()) { int t = 1; t = 2; count += 1; } }",
        );
        let assigns = stmt_named(&p, "ReduceAssign");
        assert_eq!(s.sync(assigns[0].id), Some(Sync::Reduction));
        assert_eq!(s.flagged.len(), 1);
    }

    #[test]
    fn neighbor_store_needs_atomic() {
        let (p, s) = analyze(
            "function f(Graph g, propNode<bool> m) { forall (v in g.nodes()) { \
               for (w in g.neighbors(v)) { w.m = True; } } }",
        );
        let st = stmt_named(&p, "Assignment")[0];
        assert!(s.needs_atomic(st.id));
        assert!(!s.flagged[&st.id].satisfied());
    }
}
