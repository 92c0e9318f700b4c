//! Removal of stores to local variables that are never read.

use std::collections::HashSet;

use crate::ast::*;
use crate::types::{BindingId, BindingKind, Builtin, Callee, SymbolTable};

/// Drops declarations and assignments of locals that are never read, as long
/// as dropping them loses no side effect. Properties are never touched.
/// Repeats until nothing more can be removed.
pub fn strip_dead_code(program: &Program, table: &SymbolTable) -> Program {
    let mut p = program.clone();
    loop {
        let dead = dead_locals(&p, table);
        if dead.is_empty() {
            return p;
        }
        for f in &mut p.functions {
            remove(&mut f.body, &dead, table);
        }
    }
}

fn target_binding(e: &Expr, table: &SymbolTable) -> Option<BindingId> {
    e.as_ident().and(table.names.get(&e.id).copied())
}

fn is_pure(e: &Expr, table: &SymbolTable) -> bool {
    let mut pure = true;
    e.walk(&mut |x| {
        if matches!(x.kind, ExprKind::Call { .. } | ExprKind::Method { .. }) {
            let ok = matches!(
                table.callees.get(&x.id),
                Some(Callee::Builtin(
                    Builtin::Nodes
                        | Builtin::Neighbors
                        | Builtin::NodesTo
                        | Builtin::NumNodes
                        | Builtin::NumEdges
                        | Builtin::GetEdge
                        | Builtin::IsAnEdge
                        | Builtin::CountOutNbrs
                        | Builtin::CountInNbrs
                        | Builtin::Abs
                ))
            );
            pure &= ok;
        }
    });
    pure
}

fn dead_locals(p: &Program, table: &SymbolTable) -> HashSet<BindingId> {
    let mut read = HashSet::new();
    let mut impure = HashSet::new();
    let mut candidates = HashSet::new();
    for f in &p.functions {
        f.body.walk(&mut |s| {
            let mut skip = None;
            match &s.kind {
                StmtKind::Decl { init, .. } => {
                    if let Some(&id) = table.decls.get(&s.id) {
                        candidates.insert(id);
                        if init.as_ref().is_some_and(|e| !is_pure(e, table)) {
                            impure.insert(id);
                        }
                    }
                }
                StmtKind::Assign { target, value, .. } => {
                    if let Some(id) = target_binding(target, table) {
                        skip = Some(target.id);
                        if !is_pure(value, table) {
                            impure.insert(id);
                        }
                    }
                }
                _ => {}
            }
            for e in s.kind.exprs() {
                e.walk(&mut |x| {
                    if Some(x.id) == skip {
                        return;
                    }
                    if let Some(&id) = table.names.get(&x.id) {
                        read.insert(id);
                    }
                });
            }
        });
    }
    candidates
        .into_iter()
        .filter(|id| {
            let b = table.binding(*id);
            b.kind == BindingKind::Local
                && !b.ty.is_property()
                && !read.contains(id)
                && !impure.contains(id)
        })
        .collect()
}

fn remove(b: &mut Block, dead: &HashSet<BindingId>, table: &SymbolTable) {
    b.stmts.retain(|s| match &s.kind {
        StmtKind::Decl { .. } => !table.decls.get(&s.id).is_some_and(|id| dead.contains(id)),
        StmtKind::Assign { target, .. } => {
            !target_binding(target, table).is_some_and(|id| dead.contains(&id))
        }
        _ => true,
    });
    for s in &mut b.stmts {
        match &mut s.kind {
            StmtKind::If {
                then, otherwise, ..
            } => {
                remove(then, dead, table);
                if let Some(o) = otherwise {
                    remove(o, dead, table);
                }
            }
            StmtKind::While { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::ForAll { body, .. }
            | StmtKind::FixedPoint { body, .. }
            | StmtKind::Batch { body, .. }
            | StmtKind::OnAdd { body, .. }
            | StmtKind::OnDelete { body, .. }
            | StmtKind::Block(body) => remove(body, dead, table),
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::printer::pretty_print;
    use crate::types::typecheck;

    fn strip(src: &str) -> (Program, Program) {
        let p = parse_source(src).unwrap();
        let t = typecheck(&p).unwrap();
        let q = strip_dead_code(&p, &t);
        (p, q)
    }

    #[test]
    fn unused_local_is_removed() {
        let (_, q) = strip("function f() { int t = 5; int u = 1; return u; }");
        assert_eq!(pretty_print(&q), "function f() {\n    int u = 1;\n    return u;\n}\n");
    }

    #[test]
    fn chains_are_removed_to_a_fixpoint() {
        let (_, q) = strip("function f() { int a = 1; int b = a + 1; b += 2; }");
        assert!(q.functions[0].body.stmts.is_empty());
    }

    #[test]
    fn live_program_is_unchanged() {
        let (p, q) = strip(
            "function f(Graph g, propNode<int> d) { int k = 2; forall (v in g.nodes()) { v.d = k; } }",
        );
        assert_eq!(p, q);
    }

    #[test]
    fn side_effects_are_kept() {
        let (p, q) = strip(
            "function h() { return 1; } function f() { int t = h(); }",
        );
        assert_eq!(p, q);
    }
}
