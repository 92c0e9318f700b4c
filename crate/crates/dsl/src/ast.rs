//! Syntax tree. Every statement and expression carries a unique id and the
//! source span it was parsed from.

use std::fmt;

use crate::diag::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExprId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub functions: Vec<Function>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// The `Dynamic` driver, if the program has one.
    pub fn entry(&self) -> Option<&Function> {
        self.functions.iter().find(|f| f.kind == FnKind::Dynamic)
    }

    /// The first `Static` function.
    pub fn static_entry(&self) -> Option<&Function> {
        self.functions.iter().find(|f| f.kind == FnKind::Static)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FnKind {
    Function,
    Dynamic,
    Static,
    Incremental,
    Decremental,
}

impl FnKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FnKind::Function => "function",
            FnKind::Dynamic => "Dynamic",
            FnKind::Static => "Static",
            FnKind::Incremental => "Incremental",
            FnKind::Decremental => "Decremental",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub kind: FnKind,
    pub name: String,
    pub params: Vec<Param>,
    pub body: Block,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub ty: TypeExpr,
    pub name: String,
    pub span: Span,
}

/// A type as written in source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeExpr {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
    Graph,
    PropNode(Box<TypeExpr>),
    PropEdge(Box<TypeExpr>),
    /// `updates<g>`; the graph name is optional.
    Updates(Option<String>),
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Int => f.write_str("int"),
            TypeExpr::Long => f.write_str("long"),
            TypeExpr::Float => f.write_str("float"),
            TypeExpr::Double => f.write_str("double"),
            TypeExpr::Bool => f.write_str("bool"),
            TypeExpr::Node => f.write_str("node"),
            TypeExpr::Edge => f.write_str("edge"),
            TypeExpr::Graph => f.write_str("Graph"),
            TypeExpr::PropNode(t) => write!(f, "propNode<{t}>"),
            TypeExpr::PropEdge(t) => write!(f, "propEdge<{t}>"),
            TypeExpr::Updates(Some(g)) => write!(f, "updates<{g}>"),
            TypeExpr::Updates(None) => f.write_str("updates"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    /// `x++`; the value is a synthesized literal 1.
    Incr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinMaxKind {
    Min,
    Max,
}

/// Iteration domain of a loop with an optional filter predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct Iter {
    pub source: Expr,
    pub filter: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Decl {
        ty: TypeExpr,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        op: AssignOp,
        value: Expr,
    },
    If {
        cond: Expr,
        then: Block,
        otherwise: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    /// Sequential loop over an iteration domain.
    For {
        var: String,
        iter: Iter,
        body: Block,
    },
    ForAll {
        var: String,
        iter: Iter,
        body: Block,
        /// False when nested inside another `forall`; such loops run
        /// sequentially within the outer iteration.
        parallel: bool,
    },
    FixedPoint {
        var: String,
        cond: Expr,
        body: Block,
    },
    Batch {
        updates: String,
        size: Expr,
        body: Block,
    },
    OnAdd {
        var: String,
        source: Expr,
        body: Block,
    },
    OnDelete {
        var: String,
        source: Expr,
        body: Block,
    },
    /// `Min(a, b; x, y)`: if `x` improves `a`, assign every pair at once.
    MinMax {
        kind: MinMaxKind,
        targets: Vec<Expr>,
        values: Vec<Expr>,
    },
    Expr(Expr),
    Return(Option<Expr>),
    Block(Block),
}

impl StmtKind {
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::Decl { .. } => "Declaration",
            StmtKind::Assign { op: AssignOp::Set, .. } => "Assignment",
            StmtKind::Assign { .. } => "ReduceAssign",
            StmtKind::If { .. } => "If",
            StmtKind::While { .. } => "While",
            StmtKind::For { .. } => "SimpleFor",
            StmtKind::ForAll { .. } => "ForAll",
            StmtKind::FixedPoint { .. } => "FixedPoint",
            StmtKind::Batch { .. } => "Batch",
            StmtKind::OnAdd { .. } => "OnAdd",
            StmtKind::OnDelete { .. } => "OnDelete",
            StmtKind::MinMax { kind: MinMaxKind::Min, .. } => "MinAssign",
            StmtKind::MinMax { .. } => "MaxAssign",
            StmtKind::Expr(_) => "Call",
            StmtKind::Return(_) => "Return",
            StmtKind::Block(_) => "BlockStmt",
        }
    }

    /// Nested blocks in source order.
    pub fn blocks(&self) -> Vec<&Block> {
        match self {
            StmtKind::If {
                then, otherwise, ..
            } => {
                let mut v = vec![then];
                v.extend(otherwise);
                v
            }
            StmtKind::While { body, .. }
            | StmtKind::For { body, .. }
            | StmtKind::ForAll { body, .. }
            | StmtKind::FixedPoint { body, .. }
            | StmtKind::Batch { body, .. }
            | StmtKind::OnAdd { body, .. }
            | StmtKind::OnDelete { body, .. } => vec![body],
            StmtKind::Block(b) => vec![b],
            _ => Vec::new(),
        }
    }

    /// Expressions owned directly by this statement.
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            StmtKind::Decl { init, .. } => init.iter().collect(),
            StmtKind::Assign { target, value, .. } => vec![target, value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::For { iter, .. } | StmtKind::ForAll { iter, .. } => {
                let mut v = vec![&iter.source];
                v.extend(&iter.filter);
                v
            }
            StmtKind::FixedPoint { cond, .. } => vec![cond],
            StmtKind::Batch { size, .. } => vec![size],
            StmtKind::OnAdd { source, .. } | StmtKind::OnDelete { source, .. } => vec![source],
            StmtKind::MinMax {
                targets, values, ..
            } => targets.iter().chain(values).collect(),
            StmtKind::Expr(e) => vec![e],
            StmtKind::Return(e) => e.iter().collect(),
            StmtKind::Block(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: ExprId,
    pub span: Span,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Inf,
    Ident(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    /// `x.name`: a property of a node or edge, or an edge field.
    Field(Box<Expr>, String),
    Method {
        recv: Box<Expr>,
        name: String,
        args: Vec<Arg>,
    },
    Call {
        name: String,
        args: Vec<Arg>,
    },
}

impl Expr {
    /// Child expressions in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Binary(_, a, b) => vec![a, b],
            ExprKind::Unary(_, a) | ExprKind::Field(a, _) => vec![a],
            ExprKind::Method { recv, args, .. } => {
                let mut v = vec![&**recv];
                v.extend(args.iter().map(|a| &a.value));
                v
            }
            ExprKind::Call { args, .. } => args.iter().map(|a| &a.value).collect(),
            _ => Vec::new(),
        }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(s) => Some(s),
            _ => None,
        }
    }

    /// Visits this expression and all descendants, parents first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

impl Block {
    /// Visits every statement in this block, outer statements first.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for s in &self.stmts {
            s.walk(f);
        }
    }
}

impl Stmt {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for b in self.kind.blocks() {
            b.walk(f);
        }
    }
}
