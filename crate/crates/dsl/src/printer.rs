//! Canonical source rendering of a syntax tree.

use std::fmt::Write;

use crate::ast::*;
use crate::diag::Span;

pub fn pretty_print(program: &Program) -> String {
    let mut p = Printer::default();
    for (i, f) in program.functions.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.function(f);
    }
    p.out
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut p = Printer::default();
    p.expr(e);
    p.out
}

/// Copy of `program` with every span and id zeroed, for structural comparison.
pub fn normalized(program: &Program) -> Program {
    let mut p = program.clone();
    for f in &mut p.functions {
        f.span = Span::default();
        for param in &mut f.params {
            param.span = Span::default();
        }
        clear_block(&mut f.body);
    }
    p
}

fn clear_block(b: &mut Block) {
    b.span = Span::default();
    for s in &mut b.stmts {
        s.span = Span::default();
        s.id = StmtId(0);
        match &mut s.kind {
            StmtKind::Decl { init, .. } => init.iter_mut().for_each(clear_expr),
            StmtKind::Assign { target, value, .. } => {
                clear_expr(target);
                clear_expr(value);
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                clear_expr(cond);
                clear_block(then);
                otherwise.iter_mut().for_each(clear_block);
            }
            StmtKind::While { cond, body } | StmtKind::FixedPoint { cond, body, .. } => {
                clear_expr(cond);
                clear_block(body);
            }
            StmtKind::For { iter, body, .. } | StmtKind::ForAll { iter, body, .. } => {
                clear_expr(&mut iter.source);
                iter.filter.iter_mut().for_each(clear_expr);
                clear_block(body);
            }
            StmtKind::Batch { size, body, .. } => {
                clear_expr(size);
                clear_block(body);
            }
            StmtKind::OnAdd { source, body, .. } | StmtKind::OnDelete { source, body, .. } => {
                clear_expr(source);
                clear_block(body);
            }
            StmtKind::MinMax {
                targets, values, ..
            } => targets.iter_mut().chain(values).for_each(clear_expr),
            StmtKind::Expr(e) => clear_expr(e),
            StmtKind::Return(e) => e.iter_mut().for_each(clear_expr),
            StmtKind::Block(b) => clear_block(b),
        }
    }
}

fn clear_expr(e: &mut Expr) {
    e.span = Span::default();
    e.id = ExprId(0);
    match &mut e.kind {
        ExprKind::Binary(_, a, b) => {
            clear_expr(a);
            clear_expr(b);
        }
        ExprKind::Unary(_, a) | ExprKind::Field(a, _) => clear_expr(a),
        ExprKind::Method { recv, args, .. } => {
            clear_expr(recv);
            args.iter_mut().for_each(|a| clear_expr(&mut a.value));
        }
        ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| clear_expr(&mut a.value)),
        _ => {}
    }
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line_start(&mut self) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
    }

    fn function(&mut self, f: &Function) {
        self.out.push_str(f.kind.keyword());
        if f.name != f.kind.keyword() {
            self.out.push(' ');
            self.out.push_str(&f.name);
        }
        self.out.push('(');
        for (i, p) in f.params.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            let _ = write!(self.out, "{} {}", p.ty, p.name);
        }
        self.out.push_str(") ");
        self.block(&f.body);
        self.out.push('\n');
    }

    fn block(&mut self, b: &Block) {
        self.out.push_str("{\n");
        self.indent += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
        self.line_start();
        self.out.push('}');
    }

    fn stmt(&mut self, s: &Stmt) {
        self.line_start();
        self.stmt_body(&s.kind);
        self.out.push('\n');
    }

    fn iter(&mut self, var: &str, iter: &Iter) {
        let _ = write!(self.out, "({var} in ");
        self.expr(&iter.source);
        if let Some(f) = &iter.filter {
            self.out.push_str(".filter(");
            self.expr(f);
            self.out.push(')');
        }
        self.out.push_str(") ");
    }

    fn stmt_body(&mut self, kind: &StmtKind) {
        match kind {
            StmtKind::Decl { ty, name, init } => {
                let _ = write!(self.out, "{ty} {name}");
                if let Some(e) = init {
                    self.out.push_str(" = ");
                    self.expr(e);
                }
                self.out.push(';');
            }
            StmtKind::Assign { target, op, value } => {
                self.expr(target);
                match op {
                    AssignOp::Incr => self.out.push_str("++"),
                    _ => {
                        self.out.push_str(match op {
                            AssignOp::Set => " = ",
                            AssignOp::Add => " += ",
                            _ => " -= ",
                        });
                        self.expr(value);
                    }
                }
                self.out.push(';');
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                self.out.push_str("if (");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(then);
                if let Some(b) = otherwise {
                    self.out.push_str(" else ");
                    match b.stmts.as_slice() {
                        [only] if matches!(only.kind, StmtKind::If { .. }) => {
                            self.stmt_body(&only.kind)
                        }
                        _ => self.block(b),
                    }
                }
            }
            StmtKind::While { cond, body } => {
                self.out.push_str("while (");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::For { var, iter, body } => {
                self.out.push_str("for ");
                self.iter(var, iter);
                self.block(body);
            }
            StmtKind::ForAll {
                var, iter, body, ..
            } => {
                self.out.push_str("forall ");
                self.iter(var, iter);
                self.block(body);
            }
            StmtKind::FixedPoint { var, cond, body } => {
                let _ = write!(self.out, "fixedPoint until ({var}: ");
                self.expr(cond);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::Batch {
                updates,
                size,
                body,
            } => {
                let _ = write!(self.out, "Batch({updates}: ");
                self.expr(size);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::OnAdd { var, source, body } | StmtKind::OnDelete { var, source, body } => {
                let kw = if matches!(kind, StmtKind::OnAdd { .. }) {
                    "OnAdd"
                } else {
                    "OnDelete"
                };
                let _ = write!(self.out, "{kw}({var} in ");
                self.expr(source);
                self.out.push_str(") ");
                self.block(body);
            }
            StmtKind::MinMax {
                kind,
                targets,
                values,
            } => {
                self.out.push_str(match kind {
                    MinMaxKind::Min => "Min(",
                    MinMaxKind::Max => "Max(",
                });
                self.list(targets);
                self.out.push_str("; ");
                self.list(values);
                self.out.push_str(");");
            }
            StmtKind::Expr(e) => {
                self.expr(e);
                self.out.push(';');
            }
            StmtKind::Return(e) => {
                self.out.push_str("return");
                if let Some(e) = e {
                    self.out.push(' ');
                    self.expr(e);
                }
                self.out.push(';');
            }
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn list(&mut self, exprs: &[Expr]) {
        for (i, e) in exprs.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(e);
        }
    }

    fn args(&mut self, args: &[Arg]) {
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            if let Some(n) = &a.name {
                let _ = write!(self.out, "{n} = ");
            }
            self.expr(&a.value);
        }
        self.out.push(')');
    }

    fn operand(&mut self, e: &Expr, parens: bool) {
        if parens {
            self.out.push('(');
            self.expr(e);
            self.out.push(')');
        } else {
            self.expr(e);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Int(v) => {
                let _ = write!(self.out, "{v}");
            }
            ExprKind::Float(v) => {
                let _ = write!(self.out, "{v:?}");
            }
            ExprKind::Bool(true) => self.out.push_str("True"),
            ExprKind::Bool(false) => self.out.push_str("False"),
            ExprKind::Inf => self.out.push_str("INF"),
            ExprKind::Ident(s) => self.out.push_str(s),
            ExprKind::Binary(op, a, b) => {
                let prec = op.precedence();
                let left = matches!(&a.kind, ExprKind::Binary(o, ..) if o.precedence() < prec);
                let right = matches!(&b.kind, ExprKind::Binary(o, ..) if o.precedence() <= prec);
                self.operand(a, left);
                let _ = write!(self.out, " {} ", op.symbol());
                self.operand(b, right);
            }
            ExprKind::Unary(op, a) => {
                self.out.push(match op {
                    UnOp::Neg => '-',
                    UnOp::Not => '!',
                });
                self.operand(a, matches!(a.kind, ExprKind::Binary(..)));
            }
            ExprKind::Field(recv, name) => {
                self.postfix_recv(recv);
                let _ = write!(self.out, ".{name}");
            }
            ExprKind::Method { recv, name, args } => {
                self.postfix_recv(recv);
                let _ = write!(self.out, ".{name}");
                self.args(args);
            }
            ExprKind::Call { name, args } => {
                self.out.push_str(name);
                self.args(args);
            }
        }
    }

    fn postfix_recv(&mut self, recv: &Expr) {
        let parens = matches!(recv.kind, ExprKind::Binary(..) | ExprKind::Unary(..));
        self.operand(recv, parens);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn round_trip(src: &str) {
        let a = parse_source(src).unwrap();
        let text = pretty_print(&a);
        let b = parse_source(&text).unwrap_or_else(|d| panic!("{d}\n{text}"));
        assert_eq!(normalized(&a), normalized(&b), "{text}");
    }

    #[test]
    fn parenthesizes_by_precedence() {
        round_trip("function f() { x = (a - (b - c)) * -(d + 1); y = !(p && q) || r; }");
        let p = parse_source("function f() { x = a - (b - c); }").unwrap();
        assert!(pretty_print(&p).contains("a - (b - c)"));
    }

    #[test]
    fn else_if_chain_and_loops() {
        round_trip(
            "function f(Graph g) { if (a) { } else if (b) { x = 1; } else { y++; } \
             for (v in g.nodes().filter(v < 3)) { Min(v.d; 2); } }",
        );
    }

    #[test]
    fn floats_survive() {
        round_trip("function f() { x = 1e-10; y = 0.85; z = 1.0 / 3.0; }");
    }
}
