//! Recursive-descent parser with statement-level error recovery.

use crate::ast::*;
use crate::diag::{Diagnostic, Diagnostics, Phase, Span};
use crate::lexer::{tokenize, Keyword, Token, TokenKind};

const MAX_DEPTH: usize = 128;

/// Parses a token stream produced by [`tokenize`].
pub fn parse(tokens: &[Token]) -> Result<Program, Diagnostics> {
    let (program, diags) = parse_recovering(tokens);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(Diagnostics(diags))
    }
}

/// Lexes and parses `source`, reporting lexical and syntax errors together.
pub fn parse_source(source: &str) -> Result<Program, Diagnostics> {
    let (tokens, mut diags) = tokenize(source);
    let (program, more) = parse_recovering(&tokens);
    diags.extend(more);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(Diagnostics(diags))
    }
}

/// Parses as much as possible, returning the partial program together with
/// every syntax error found.
pub fn parse_recovering(tokens: &[Token]) -> (Program, Vec<Diagnostic>) {
    let eof = Token {
        kind: TokenKind::Eof,
        span: tokens.last().map(|t| t.span).unwrap_or_default(),
    };
    let mut p = Parser {
        tokens,
        eof,
        pos: 0,
        next_stmt: 0,
        next_expr: 0,
        diags: Vec::new(),
        depth: 0,
        forall_depth: 0,
    };
    let mut functions = Vec::new();
    while !p.at(&TokenKind::Eof) {
        match p.function() {
            Ok(f) => functions.push(f),
            Err(Stop) => p.skip_to_function(),
        }
    }
    (Program { functions }, p.diags)
}

/// Marker for an error that has already been recorded.
#[derive(Debug)]
struct Stop;

type PResult<T> = Result<T, Stop>;

struct Parser<'t> {
    tokens: &'t [Token],
    eof: Token,
    pos: usize,
    next_stmt: u32,
    next_expr: u32,
    diags: Vec<Diagnostic>,
    depth: usize,
    forall_depth: usize,
}

fn function_keyword(kind: &TokenKind) -> Option<FnKind> {
    match kind {
        TokenKind::Kw(Keyword::Function) => Some(FnKind::Function),
        TokenKind::Kw(Keyword::Dynamic) => Some(FnKind::Dynamic),
        TokenKind::Kw(Keyword::Static) => Some(FnKind::Static),
        TokenKind::Kw(Keyword::Incremental) => Some(FnKind::Incremental),
        TokenKind::Kw(Keyword::Decremental) => Some(FnKind::Decremental),
        _ => None,
    }
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &Token {
        self.tokens.get(self.pos).unwrap_or(&self.eof)
    }

    fn peek_at(&self, k: usize) -> &Token {
        self.tokens.get(self.pos + k).unwrap_or(&self.eof)
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.at(&TokenKind::Kw(kw))
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() && t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            self.peek().span
        } else {
            self.tokens[self.pos - 1].span
        }
    }

    fn error(&mut self, expected: &[&str]) -> Stop {
        let t = self.peek().clone();
        let msg = if expected.len() == 1 {
            format!("expected {}, found {}", expected[0], t.kind.describe())
        } else {
            format!("unexpected {}", t.kind.describe())
        };
        self.diags
            .push(Diagnostic::new(Phase::Parse, t.span, msg).expecting(expected));
        Stop
    }

    fn error_at(&mut self, span: Span, msg: impl Into<String>) -> Stop {
        self.diags.push(Diagnostic::new(Phase::Parse, span, msg));
        Stop
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            let want = match &kind {
                TokenKind::Kw(k) => format!("`{}`", k.as_str()),
                other => format!("`{}`", other.symbol()),
            };
            Err(self.error(&[want.as_str()]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().kind {
            TokenKind::Ident(s) => {
                let s = s.clone();
                let t = self.bump();
                Ok((s, t.span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let span = self.peek().span;
            self.depth -= 1;
            return Err(self.error_at(span, "nesting too deep"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn stmt_id(&mut self) -> StmtId {
        self.next_stmt += 1;
        StmtId(self.next_stmt - 1)
    }

    fn mk_expr(&mut self, span: Span, kind: ExprKind) -> Expr {
        self.next_expr += 1;
        Expr {
            id: ExprId(self.next_expr - 1),
            span,
            kind,
        }
    }

    fn skip_to_function(&mut self) {
        self.bump();
        while !self.at(&TokenKind::Eof) {
            let after_brace = self.tokens[self.pos - 1].kind == TokenKind::RBrace;
            if function_keyword(&self.peek().kind).is_some()
                && (after_brace || matches!(self.peek_at(1).kind, TokenKind::Ident(_)))
            {
                return;
            }
            self.bump();
        }
    }

    /// Skips past the next `;`, or up to a `}` at the current nesting level.
    fn sync_statement(&mut self) {
        let start = self.pos;
        let mut depth = 0usize;
        loop {
            match self.peek().kind {
                TokenKind::Eof => return,
                TokenKind::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                TokenKind::LBrace => depth += 1,
                TokenKind::RBrace => {
                    if depth == 0 {
                        if self.pos == start {
                            self.bump();
                        }
                        return;
                    }
                    depth -= 1;
                    if depth == 0 {
                        self.bump();
                        return;
                    }
                }
                _ => {}
            }
            self.bump();
        }
    }

    fn function(&mut self) -> PResult<Function> {
        let start = self.peek().span;
        let kind = match function_keyword(&self.peek().kind) {
            Some(k) => k,
            None => {
                return Err(self.error(&[
                    "`function`",
                    "`Dynamic`",
                    "`Static`",
                    "`Incremental`",
                    "`Decremental`",
                ]))
            }
        };
        self.bump();
        let name = if self.at(&TokenKind::LParen) && kind != FnKind::Function {
            kind.keyword().to_string()
        } else {
            self.ident()?.0
        };
        self.expect(TokenKind::LParen)?;
        let mut params = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                let pstart = self.peek().span;
                let ty = self.type_expr()?;
                let (pname, pspan) = self.ident()?;
                params.push(Param {
                    ty,
                    name: pname,
                    span: pstart.to(pspan),
                });
                if self.at(&TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        let body = self.block()?;
        Ok(Function {
            kind,
            name,
            params,
            span: start.to(body.span),
            body,
        })
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let kw = match self.peek().kind {
            TokenKind::Kw(k) if k.is_type() => k,
            _ => return Err(self.error(&["type"])),
        };
        self.bump();
        Ok(match kw {
            Keyword::Int => TypeExpr::Int,
            Keyword::Long => TypeExpr::Long,
            Keyword::Float => TypeExpr::Float,
            Keyword::Double => TypeExpr::Double,
            Keyword::Bool => TypeExpr::Bool,
            Keyword::Node => TypeExpr::Node,
            Keyword::Edge => TypeExpr::Edge,
            Keyword::Graph => TypeExpr::Graph,
            Keyword::PropNode | Keyword::PropEdge => {
                self.expect(TokenKind::Lt)?;
                self.enter()?;
                let inner = self.type_expr();
                self.leave();
                let inner = Box::new(inner?);
                self.expect(TokenKind::Gt)?;
                if kw == Keyword::PropNode {
                    TypeExpr::PropNode(inner)
                } else {
                    TypeExpr::PropEdge(inner)
                }
            }
            Keyword::Updates => {
                if self.at(&TokenKind::Lt) {
                    self.bump();
                    let (g, _) = self.ident()?;
                    self.expect(TokenKind::Gt)?;
                    TypeExpr::Updates(Some(g))
                } else {
                    TypeExpr::Updates(None)
                }
            }
            _ => unreachable!(),
        })
    }

    fn block(&mut self) -> PResult<Block> {
        let open = self.expect(TokenKind::LBrace)?;
        self.enter()?;
        let mut stmts = Vec::new();
        let result = loop {
            if self.at(&TokenKind::RBrace) {
                let close = self.bump();
                break Ok(open.span.to(close.span));
            }
            if self.at(&TokenKind::Eof) {
                break Err(self.error(&["`}`"]));
            }
            match self.statement() {
                Ok(s) => stmts.push(s),
                Err(Stop) => {
                    if self.depth >= MAX_DEPTH {
                        break Err(Stop);
                    }
                    self.sync_statement();
                }
            }
        };
        self.leave();
        Ok(Block {
            stmts,
            span: result?,
        })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let kind = match self.peek().kind.clone() {
            TokenKind::Kw(k) if k.is_type() => {
                let ty = self.type_expr()?;
                let (name, _) = self.ident()?;
                let init = if self.at(&TokenKind::Assign) {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                self.expect(TokenKind::Semi)?;
                StmtKind::Decl { ty, name, init }
            }
            TokenKind::Kw(Keyword::Forall) => {
                self.bump();
                let (var, iter) = self.loop_header()?;
                let parallel = self.forall_depth == 0;
                self.forall_depth += 1;
                let body = self.block();
                self.forall_depth -= 1;
                StmtKind::ForAll {
                    var,
                    iter,
                    body: body?,
                    parallel,
                }
            }
            TokenKind::Kw(Keyword::For) => {
                self.bump();
                let (var, iter) = self.loop_header()?;
                let body = self.block()?;
                StmtKind::For { var, iter, body }
            }
            TokenKind::Kw(Keyword::FixedPoint) => {
                self.bump();
                self.expect(TokenKind::Kw(Keyword::Until))?;
                self.expect(TokenKind::LParen)?;
                let (var, _) = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.block()?;
                StmtKind::FixedPoint { var, cond, body }
            }
            TokenKind::Kw(Keyword::Batch) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let (updates, _) = self.ident()?;
                self.expect(TokenKind::Colon)?;
                let size = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.block()?;
                StmtKind::Batch {
                    updates,
                    size,
                    body,
                }
            }
            TokenKind::Kw(kw @ (Keyword::OnAdd | Keyword::OnDelete)) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let (var, _) = self.ident()?;
                self.expect(TokenKind::Kw(Keyword::In))?;
                let source = self.expr()?;
                self.expect(TokenKind::RParen)?;
                if self.at(&TokenKind::Colon) {
                    self.bump();
                }
                let body = self.block()?;
                if kw == Keyword::OnAdd {
                    StmtKind::OnAdd { var, source, body }
                } else {
                    StmtKind::OnDelete { var, source, body }
                }
            }
            TokenKind::Kw(Keyword::If) => self.if_stmt()?,
            TokenKind::Kw(Keyword::While) => {
                self.bump();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr()?;
                self.expect(TokenKind::RParen)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            TokenKind::Kw(Keyword::Return) => {
                self.bump();
                let value = if self.at(&TokenKind::Semi) {
                    None
                } else {
                    Some(self.expr()?)
                };
                self.expect(TokenKind::Semi)?;
                StmtKind::Return(value)
            }
            TokenKind::LBrace => StmtKind::Block(self.block()?),
            TokenKind::Ident(ref name)
                if (name == "Min" || name == "Max")
                    && self.peek_at(1).kind == TokenKind::LParen =>
            {
                self.min_max()?
            }
            _ => self.simple_statement()?,
        };
        let span = start.to(self.prev_span());
        Ok(Stmt {
            id: self.stmt_id(),
            span,
            kind,
        })
    }

    fn loop_header(&mut self) -> PResult<(String, Iter)> {
        self.expect(TokenKind::LParen)?;
        let (var, _) = self.ident()?;
        self.expect(TokenKind::Kw(Keyword::In))?;
        let e = self.expr()?;
        self.expect(TokenKind::RParen)?;
        let iter = match e.kind {
            ExprKind::Method {
                recv,
                name,
                mut args,
            } if name == "filter" && args.len() == 1 && args[0].name.is_none() => Iter {
                source: *recv,
                filter: Some(args.remove(0).value),
            },
            kind => Iter {
                source: Expr { kind, ..e },
                filter: None,
            },
        };
        Ok((var, iter))
    }

    fn if_stmt(&mut self) -> PResult<StmtKind> {
        self.expect(TokenKind::Kw(Keyword::If))?;
        self.expect(TokenKind::LParen)?;
        let cond = self.expr()?;
        self.expect(TokenKind::RParen)?;
        let then = self.block()?;
        let otherwise = if self.at_kw(Keyword::Else) {
            self.bump();
            if self.at_kw(Keyword::If) {
                let start = self.peek().span;
                self.enter()?;
                let nested = self.if_stmt();
                self.leave();
                let kind = nested?;
                let span = start.to(self.prev_span());
                let id = self.stmt_id();
                Some(Block {
                    stmts: vec![Stmt { id, span, kind }],
                    span,
                })
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(StmtKind::If {
            cond,
            then,
            otherwise,
        })
    }

    fn min_max(&mut self) -> PResult<StmtKind> {
        let (name, span) = self.ident()?;
        let kind = if name == "Min" {
            MinMaxKind::Min
        } else {
            MinMaxKind::Max
        };
        self.expect(TokenKind::LParen)?;
        let mut targets = vec![self.expr()?];
        while self.at(&TokenKind::Comma) {
            self.bump();
            targets.push(self.expr()?);
        }
        let values = if self.at(&TokenKind::Semi) {
            self.bump();
            let mut values = vec![self.expr()?];
            while self.at(&TokenKind::Comma) {
                self.bump();
                values.push(self.expr()?);
            }
            values
        } else {
            if targets.len() != 2 {
                return Err(self.error_at(
                    span,
                    format!("{name} without `;` takes exactly a target and a value"),
                ));
            }
            vec![targets.pop().unwrap()]
        };
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::Semi)?;
        if targets.len() != values.len() {
            return Err(self.error_at(
                span,
                format!(
                    "{name} has {} targets but {} values",
                    targets.len(),
                    values.len()
                ),
            ));
        }
        for t in &targets {
            if !matches!(t.kind, ExprKind::Ident(_) | ExprKind::Field(..)) {
                return Err(self.error_at(t.span, "Min/Max target must be a variable or property"));
            }
        }
        Ok(StmtKind::MinMax {
            kind,
            targets,
            values,
        })
    }

    fn simple_statement(&mut self) -> PResult<StmtKind> {
        let e = self.expr()?;
        let op = match self.peek().kind {
            TokenKind::Assign => Some(AssignOp::Set),
            TokenKind::PlusEq => Some(AssignOp::Add),
            TokenKind::MinusEq => Some(AssignOp::Sub),
            TokenKind::PlusPlus => Some(AssignOp::Incr),
            _ => None,
        };
        let kind = match op {
            Some(op) => {
                if !matches!(e.kind, ExprKind::Ident(_) | ExprKind::Field(..)) {
                    return Err(self.error_at(e.span, "invalid assignment target"));
                }
                let t = self.bump();
                let value = if op == AssignOp::Incr {
                    self.mk_expr(t.span, ExprKind::Int(1))
                } else {
                    self.expr()?
                };
                StmtKind::Assign {
                    target: e,
                    op,
                    value,
                }
            }
            None => {
                if !matches!(e.kind, ExprKind::Call { .. } | ExprKind::Method { .. }) {
                    return Err(self.error(&["`=`", "`+=`", "`-=`", "`++`"]));
                }
                StmtKind::Expr(e)
            }
        };
        self.expect(TokenKind::Semi)?;
        Ok(kind)
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.binary(1);
        self.leave();
        e
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek().kind {
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            TokenKind::Percent => BinOp::Rem,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::EqEq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::AndAnd => BinOp::And,
            TokenKind::OrOr => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump();
            self.enter()?;
            let rhs = self.binary(prec + 1);
            self.leave();
            let rhs = rhs?;
            let span = lhs.span.to(rhs.span);
            lhs = self.mk_expr(span, ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek().kind {
            TokenKind::Not => Some(UnOp::Not),
            TokenKind::Minus => Some(UnOp::Neg),
            _ => None,
        };
        match op {
            Some(op) => {
                let t = self.bump();
                self.enter()?;
                let inner = self.unary();
                self.leave();
                let inner = inner?;
                let span = t.span.to(inner.span);
                Ok(self.mk_expr(span, ExprKind::Unary(op, Box::new(inner))))
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.at(&TokenKind::Dot) {
            self.bump();
            let (name, nspan) = self.ident()?;
            if self.at(&TokenKind::LParen) {
                let args = self.args()?;
                let span = e.span.to(self.prev_span());
                e = self.mk_expr(
                    span,
                    ExprKind::Method {
                        recv: Box::new(e),
                        name,
                        args,
                    },
                );
            } else {
                let span = e.span.to(nspan);
                e = self.mk_expr(span, ExprKind::Field(Box::new(e), name));
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Arg>> {
        self.expect(TokenKind::LParen)?;
        let mut args = Vec::new();
        if !self.at(&TokenKind::RParen) {
            loop {
                let name = match (&self.peek().kind, &self.peek_at(1).kind) {
                    (TokenKind::Ident(n), TokenKind::Assign) => {
                        let n = n.clone();
                        self.bump();
                        self.bump();
                        Some(n)
                    }
                    _ => None,
                };
                let value = self.expr()?;
                args.push(Arg { name, value });
                if self.at(&TokenKind::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Int(v) => {
                self.bump();
                ExprKind::Int(v)
            }
            TokenKind::Float(v) => {
                self.bump();
                ExprKind::Float(v)
            }
            TokenKind::Kw(Keyword::True) => {
                self.bump();
                ExprKind::Bool(true)
            }
            TokenKind::Kw(Keyword::False) => {
                self.bump();
                ExprKind::Bool(false)
            }
            TokenKind::Ident(name) if name == "INF" => {
                self.bump();
                ExprKind::Inf
            }
            TokenKind::Ident(name) => {
                self.bump();
                if self.at(&TokenKind::LParen) {
                    let args = self.args()?;
                    ExprKind::Call { name, args }
                } else {
                    ExprKind::Ident(name)
                }
            }
            TokenKind::Kw(
                kw @ (Keyword::Incremental | Keyword::Decremental | Keyword::Static | Keyword::Dynamic),
            ) if self.peek_at(1).kind == TokenKind::LParen => {
                self.bump();
                let args = self.args()?;
                ExprKind::Call {
                    name: kw.as_str().to_string(),
                    args,
                }
            }
            TokenKind::LParen => {
                self.bump();
                let mut inner = self.expr()?;
                let close = self.expect(TokenKind::RParen)?;
                inner.span = t.span.to(close.span);
                return Ok(inner);
            }
            _ => return Err(self.error(&["expression"])),
        };
        let span = t.span.to(self.prev_span());
        Ok(self.mk_expr(span, kind))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_ok(src: &str) -> Program {
        parse_source(src).unwrap_or_else(|d| panic!("{d}"))
    }

    #[test]
    fn empty_function_body() {
        let p = parse_ok("function f() { }");
        assert_eq!(p.functions.len(), 1);
        assert!(p.functions[0].body.stmts.is_empty());
    }

    #[test]
    fn filter_is_split_from_domain() {
        let p = parse_ok(
            "function f(Graph g) { forall (v in g.nodes().filter(modified == True)) { } }",
        );
        match &p.functions[0].body.stmts[0].kind {
            StmtKind::ForAll { iter, parallel, .. } => {
                assert!(*parallel);
                assert!(iter.filter.is_some());
                assert!(matches!(&iter.source.kind, ExprKind::Method { name, .. } if name == "nodes"));
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn nested_forall_is_sequential() {
        let p = parse_ok(
            "function f(Graph g) { forall (v in g.nodes()) { forall (w in g.neighbors(v)) { } } }",
        );
        let mut flags = Vec::new();
        p.functions[0].body.walk(&mut |s| {
            if let StmtKind::ForAll { parallel, .. } = s.kind {
                flags.push(parallel);
            }
        });
        assert_eq!(flags, vec![true, false]);
    }

    #[test]
    fn min_forms() {
        let p = parse_ok("function f() { Min(a.d, a.m; 1, True); Max(x, y); }");
        let stmts = &p.functions[0].body.stmts;
        assert!(
            matches!(&stmts[0].kind, StmtKind::MinMax { kind: MinMaxKind::Min, targets, .. } if targets.len() == 2)
        );
        assert!(
            matches!(&stmts[1].kind, StmtKind::MinMax { kind: MinMaxKind::Max, targets, values } if targets.len() == 1 && values.len() == 1)
        );
    }

    #[test]
    fn precedence_climbs() {
        let p = parse_ok("function f() { x = 1 + 2 * 3 < 4 && !b; }");
        let StmtKind::Assign { value, .. } = &p.functions[0].body.stmts[0].kind else {
            panic!()
        };
        assert!(matches!(value.kind, ExprKind::Binary(BinOp::And, _, _)));
    }

    #[test]
    fn recovers_and_reports_each_bad_statement() {
        let err = parse_source("function f() { x = ; y = 2; z = ) ; }").unwrap_err();
        assert_eq!(err.0.len(), 2);
        assert!(err.0.iter().all(|d| d.span.line == 1));
        assert!(err.0[0].expected.contains(&"expression".to_string()));
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let src = format!("function f() {{ x = {}1{}; }}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse_source(&src).is_err());
        let src = format!("function f() {}{}", "{".repeat(5000), "}".repeat(5000));
        assert!(parse_source(&src).is_err());
    }

    #[test]
    fn keyword_named_functions() {
        let p = parse_ok("Incremental(Graph g) { } Dynamic D(Graph g) { Incremental(g); }");
        assert_eq!(p.functions[0].name, "Incremental");
        assert_eq!(p.entry().unwrap().name, "D");
    }
}
