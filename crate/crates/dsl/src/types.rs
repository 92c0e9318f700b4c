//! Name resolution, type checking and construct-placement rules.

use std::collections::HashMap;
use std::fmt;

use crate::ast::*;
use crate::diag::{Diagnostic, Diagnostics, Phase, Span};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
    Graph,
    PropNode(Box<Type>),
    PropEdge(Box<Type>),
    Updates,
    /// Result of `g.nodes()`, `g.neighbors(v)` or `g.nodesTo(v)`.
    NodeSet,
    /// Result of `updates.currentBatch(..)`.
    UpdateSet,
    Void,
    /// The `INF` literal before it meets a concrete numeric type.
    Inf,
    /// Placeholder after an error; compatible with everything.
    Unknown,
}

impl Type {
    pub fn from_expr(t: &TypeExpr) -> Type {
        match t {
            TypeExpr::Int => Type::Int,
            TypeExpr::Long => Type::Long,
            TypeExpr::Float => Type::Float,
            TypeExpr::Double => Type::Double,
            TypeExpr::Bool => Type::Bool,
            TypeExpr::Node => Type::Node,
            TypeExpr::Edge => Type::Edge,
            TypeExpr::Graph => Type::Graph,
            TypeExpr::PropNode(t) => Type::PropNode(Box::new(Type::from_expr(t))),
            TypeExpr::PropEdge(t) => Type::PropEdge(Box::new(Type::from_expr(t))),
            TypeExpr::Updates(_) => Type::Updates,
        }
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, Type::Int | Type::Long | Type::Node)
    }

    pub fn is_floating(&self) -> bool {
        matches!(self, Type::Float | Type::Double)
    }

    pub fn is_numeric(&self) -> bool {
        self.is_integral() || self.is_floating() || matches!(self, Type::Inf)
    }

    pub fn is_scalar(&self) -> bool {
        self.is_numeric() || matches!(self, Type::Bool)
    }

    pub fn is_property(&self) -> bool {
        matches!(self, Type::PropNode(_) | Type::PropEdge(_))
    }

    /// Element type of a property.
    pub fn element(&self) -> Option<&Type> {
        match self {
            Type::PropNode(t) | Type::PropEdge(t) => Some(t),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Type::Int | Type::Node => 0,
            Type::Long => 1,
            Type::Float => 2,
            Type::Double => 3,
            _ => 0,
        }
    }

    /// Whether a value of type `from` may be stored into `self`.
    pub fn accepts(&self, from: &Type) -> bool {
        use Type::*;
        match (self, from) {
            (Unknown, _) | (_, Unknown) => true,
            (a, b) if a == b => true,
            (a, Inf) => a.is_numeric(),
            (a, b) if a.is_integral() && b.is_integral() => true,
            (a, b) if a.is_floating() && (b.is_integral() || b.is_floating()) => true,
            _ => false,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Long => f.write_str("long"),
            Type::Float => f.write_str("float"),
            Type::Double => f.write_str("double"),
            Type::Bool => f.write_str("bool"),
            Type::Node => f.write_str("node"),
            Type::Edge => f.write_str("edge"),
            Type::Graph => f.write_str("Graph"),
            Type::PropNode(t) => write!(f, "propNode<{t}>"),
            Type::PropEdge(t) => write!(f, "propEdge<{t}>"),
            Type::Updates => f.write_str("updates"),
            Type::NodeSet => f.write_str("node set"),
            Type::UpdateSet => f.write_str("update set"),
            Type::Void => f.write_str("void"),
            Type::Inf => f.write_str("INF"),
            Type::Unknown => f.write_str("<unknown>"),
        }
    }
}

/// Wider of two numeric types.
fn widen(a: &Type, b: &Type) -> Type {
    match (a, b) {
        (Type::Unknown, _) | (_, Type::Unknown) => Type::Unknown,
        (Type::Inf, t) | (t, Type::Inf) => t.clone(),
        (a, b) => {
            let t = if a.rank() >= b.rank() { a } else { b };
            if *t == Type::Node {
                Type::Int
            } else {
                t.clone()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BindingId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingKind {
    Param,
    Local,
    LoopVar,
    FixedPointVar,
    /// `<p>_nxt`, the implicit next-iteration companion of property `p`.
    Companion(BindingId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub name: String,
    pub ty: Type,
    pub mutable: bool,
    pub kind: BindingKind,
    pub function: String,
    pub span: Span,
    /// Declared inside a `forall` body, so each iteration has its own copy.
    pub private: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FnSig {
    pub name: String,
    pub kind: FnKind,
    pub params: Vec<(String, Type)>,
    pub ret: Type,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Nodes,
    Neighbors,
    NodesTo,
    NumNodes,
    NumEdges,
    AttachNodeProperty,
    AttachEdgeProperty,
    UpdateCsrAdd,
    UpdateCsrDel,
    PropagateNodeFlags,
    GetEdge,
    IsAnEdge,
    CountOutNbrs,
    CountInNbrs,
    CurrentBatch,
    Abs,
}

impl Builtin {
    fn graph_method(name: &str) -> Option<Builtin> {
        Some(match name {
            "nodes" => Builtin::Nodes,
            "neighbors" => Builtin::Neighbors,
            "nodesTo" => Builtin::NodesTo,
            "num_nodes" => Builtin::NumNodes,
            "num_edges" => Builtin::NumEdges,
            "attachNodeProperty" => Builtin::AttachNodeProperty,
            "attachEdgeProperty" => Builtin::AttachEdgeProperty,
            "updateCSRAdd" => Builtin::UpdateCsrAdd,
            "updateCSRDel" => Builtin::UpdateCsrDel,
            "propagateNodeFlags" => Builtin::PropagateNodeFlags,
            "get_edge" => Builtin::GetEdge,
            "is_an_edge" => Builtin::IsAnEdge,
            "count_outNbrs" => Builtin::CountOutNbrs,
            "count_inNbrs" => Builtin::CountInNbrs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Callee {
    User(String),
    Builtin(Builtin),
}

/// How a field access or bare property name reads memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    NodeProp(BindingId),
    EdgeProp(BindingId),
    /// Bare property name in a loop filter: the loop variable's element.
    LoopVarProp(BindingId),
    /// Bare boolean property in a `fixedPoint` condition: true when any
    /// node's flag is set.
    AnyNode(BindingId),
    EdgeSource,
    EdgeDestination,
    EdgeWeight,
}

/// Result of type checking: every binding, every expression's type and the
/// resolution of every name, field and call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SymbolTable {
    pub functions: Vec<FnSig>,
    pub bindings: Vec<Binding>,
    pub expr_types: HashMap<ExprId, Type>,
    /// Identifier expressions and the binding they name.
    pub names: HashMap<ExprId, BindingId>,
    pub accesses: HashMap<ExprId, Access>,
    pub callees: HashMap<ExprId, Callee>,
    /// Named arguments of `attachNodeProperty`/`attachEdgeProperty`, keyed
    /// by the call expression, in argument order.
    pub attach_targets: HashMap<ExprId, Vec<BindingId>>,
    /// Variables bound by loops, `OnAdd`/`OnDelete` and `fixedPoint`.
    pub stmt_bindings: HashMap<StmtId, BindingId>,
    /// Local declarations.
    pub decls: HashMap<StmtId, BindingId>,
    /// Function parameters in order.
    pub params: HashMap<String, Vec<BindingId>>,
}

impl SymbolTable {
    pub fn binding(&self, id: BindingId) -> &Binding {
        &self.bindings[id.0 as usize]
    }

    pub fn signature(&self, name: &str) -> Option<&FnSig> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn type_of(&self, e: &Expr) -> &Type {
        self.expr_types.get(&e.id).unwrap_or(&Type::Unknown)
    }

    /// Companion `_nxt` binding of a property, if one was referenced.
    pub fn companion_of(&self, base: BindingId) -> Option<BindingId> {
        self.bindings
            .iter()
            .position(|b| b.kind == BindingKind::Companion(base))
            .map(|i| BindingId(i as u32))
    }
}

/// Checks `program` and builds its symbol table. All diagnostics are
/// collected before returning.
pub fn typecheck(program: &Program) -> Result<SymbolTable, Diagnostics> {
    let mut sigs: Vec<FnSig> = Vec::new();
    let mut diags = Vec::new();
    for f in &program.functions {
        if sigs.iter().any(|s| s.name == f.name) {
            diags.push(Diagnostic::new(
                Phase::Type,
                f.span,
                format!("function `{}` is defined more than once", f.name),
            ));
            continue;
        }
        sigs.push(FnSig {
            name: f.name.clone(),
            kind: f.kind,
            params: f
                .params
                .iter()
                .map(|p| (p.name.clone(), Type::from_expr(&p.ty)))
                .collect(),
            ret: Type::Void,
        });
    }
    if program.functions.iter().filter(|f| f.kind == FnKind::Dynamic).count() > 1 {
        let f = program
            .functions
            .iter()
            .filter(|f| f.kind == FnKind::Dynamic)
            .nth(1)
            .unwrap();
        diags.push(Diagnostic::new(
            Phase::Type,
            f.span,
            "a program may have only one Dynamic driver",
        ));
    }
    // Return types are inferred; repeat until calls see settled signatures.
    for _ in 0..=program.functions.len() {
        let mut c = Checker::new(sigs.clone());
        c.run(program);
        let settled = c.table.functions == sigs;
        sigs = c.table.functions.clone();
        if settled {
            diags.extend(c.diags);
            return if diags.is_empty() {
                Ok(c.table)
            } else {
                Err(Diagnostics(diags))
            };
        }
    }
    let mut c = Checker::new(sigs);
    c.run(program);
    diags.extend(c.diags);
    if diags.is_empty() {
        Ok(c.table)
    } else {
        Err(Diagnostics(diags))
    }
}

struct Checker {
    table: SymbolTable,
    diags: Vec<Diagnostic>,
    scopes: Vec<HashMap<String, BindingId>>,
    function: String,
    forall_depth: usize,
    batch_depth: usize,
    filter_var: Option<BindingId>,
    in_fixed_point_cond: bool,
    returns: Vec<(Type, Span)>,
}

impl Checker {
    fn new(sigs: Vec<FnSig>) -> Self {
        Checker {
            table: SymbolTable {
                functions: sigs,
                ..SymbolTable::default()
            },
            diags: Vec::new(),
            scopes: Vec::new(),
            function: String::new(),
            forall_depth: 0,
            batch_depth: 0,
            filter_var: None,
            in_fixed_point_cond: false,
            returns: Vec::new(),
        }
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(Phase::Type, span, msg));
    }

    fn run(&mut self, program: &Program) {
        for f in &program.functions {
            self.function(f);
        }
    }

    fn function(&mut self, f: &Function) {
        self.function = f.name.clone();
        self.returns.clear();
        self.scopes = vec![HashMap::new()];
        let mut ids = Vec::new();
        for p in &f.params {
            let ty = Type::from_expr(&p.ty);
            let mutable = ty.is_scalar() && ty != Type::Node;
            if let Some(id) = self.declare(&p.name, ty, mutable, BindingKind::Param, p.span) {
                ids.push(id);
            }
        }
        self.table.params.insert(f.name.clone(), ids);
        self.block(&f.body);
        self.scopes.clear();

        let mut ret: Option<Type> = None;
        let returns = std::mem::take(&mut self.returns);
        for (t, span) in &returns {
            ret = Some(match ret {
                None => t.clone(),
                Some(prev) if prev == *t => prev,
                Some(prev) if prev.is_numeric() && t.is_numeric() => widen(&prev, t),
                Some(prev) => {
                    self.error(
                        *span,
                        format!("`{}` returns both {prev} and {t}", f.name),
                    );
                    prev
                }
            });
        }
        let ret = match ret {
            Some(Type::Inf) => Type::Int,
            Some(t) => t,
            None => Type::Void,
        };
        if ret != Type::Void && returns.iter().any(|(t, _)| *t == Type::Void) {
            self.error(f.span, format!("`{}` mixes bare `return;` with returned values", f.name));
        }
        if let Some(sig) = self.table.functions.iter_mut().find(|s| s.name == f.name) {
            sig.ret = ret;
        }
    }

    fn declare(
        &mut self,
        name: &str,
        ty: Type,
        mutable: bool,
        kind: BindingKind,
        span: Span,
    ) -> Option<BindingId> {
        let scope = self.scopes.last_mut().expect("scope");
        if scope.contains_key(name) {
            self.error(span, format!("`{name}` is already declared in this scope"));
            return None;
        }
        let id = BindingId(self.table.bindings.len() as u32);
        self.table.bindings.push(Binding {
            name: name.to_string(),
            ty,
            mutable,
            kind,
            function: self.function.clone(),
            span,
            private: self.forall_depth > 0,
        });
        self.scopes.last_mut().unwrap().insert(name.to_string(), id);
        Some(id)
    }

    fn lookup(&mut self, name: &str) -> Option<BindingId> {
        for scope in self.scopes.iter().rev() {
            if let Some(&id) = scope.get(name) {
                return Some(id);
            }
        }
        let base = name.strip_suffix("_nxt")?;
        let base_id = self.lookup(base)?;
        let base_binding = self.table.binding(base_id).clone();
        if !base_binding.ty.is_property() {
            return None;
        }
        if let Some(id) = self.table.companion_of(base_id) {
            return Some(id);
        }
        let id = BindingId(self.table.bindings.len() as u32);
        self.table.bindings.push(Binding {
            name: name.to_string(),
            kind: BindingKind::Companion(base_id),
            ..base_binding
        });
        Some(id)
    }

    fn block(&mut self, b: &Block) {
        self.scopes.push(HashMap::new());
        for s in &b.stmts {
            self.stmt(s);
        }
        self.scopes.pop();
    }

    fn scoped_block(&mut self, var: &str, ty: Type, kind: BindingKind, stmt: &Stmt, body: &Block) {
        self.scopes.push(HashMap::new());
        if let Some(id) = self.declare(var, ty, false, kind, stmt.span) {
            self.table.stmt_bindings.insert(stmt.id, id);
        }
        self.block(body);
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Decl { ty, name, init } => {
                let t = Type::from_expr(ty);
                if t.is_property() && init.is_some() {
                    self.error(s.span, "property declarations take no initializer; use attachNodeProperty");
                }
                if t.is_property() && self.forall_depth > 0 {
                    self.error(s.span, "properties cannot be declared inside forall");
                }
                if matches!(t, Type::Graph | Type::Updates) {
                    self.error(s.span, format!("`{t}` values can only be parameters"));
                }
                if let Some(e) = init {
                    let vt = self.expr(e);
                    if !t.accepts(&vt) {
                        self.error(e.span, format!("cannot initialize {t} `{name}` with {vt}"));
                    }
                }
                let mutable = !t.is_property();
                if let Some(id) = self.declare(name, t, mutable, BindingKind::Local, s.span) {
                    self.table.decls.insert(s.id, id);
                }
            }
            StmtKind::Assign { target, op, value } => self.assign(target, *op, value),
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                self.condition(cond);
                self.block(then);
                if let Some(b) = otherwise {
                    self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                self.condition(cond);
                self.block(body);
            }
            StmtKind::For { var, iter, body } | StmtKind::ForAll { var, iter, body, .. } => {
                let forall = matches!(s.kind, StmtKind::ForAll { .. });
                let st = self.expr(&iter.source);
                let var_ty = match st {
                    Type::NodeSet => Type::Node,
                    Type::UpdateSet | Type::Updates => Type::Edge,
                    Type::Unknown => Type::Unknown,
                    other => {
                        self.error(iter.source.span, format!("cannot iterate over {other}"));
                        Type::Unknown
                    }
                };
                self.scopes.push(HashMap::new());
                if forall {
                    self.forall_depth += 1;
                }
                let id = self.declare(var, var_ty, false, BindingKind::LoopVar, s.span);
                if let Some(id) = id {
                    self.table.stmt_bindings.insert(s.id, id);
                }
                if let Some(f) = &iter.filter {
                    let saved = self.filter_var;
                    self.filter_var = id;
                    self.condition(f);
                    self.filter_var = saved;
                }
                self.block(body);
                if forall {
                    self.forall_depth -= 1;
                }
                self.scopes.pop();
            }
            StmtKind::FixedPoint { var, cond, body } => {
                if self.forall_depth > 0 {
                    self.error(s.span, "fixedPoint cannot appear inside forall");
                }
                self.scopes.push(HashMap::new());
                if let Some(id) = self.declare(var, Type::Bool, true, BindingKind::FixedPointVar, s.span) {
                    self.table.stmt_bindings.insert(s.id, id);
                }
                self.in_fixed_point_cond = true;
                self.condition(cond);
                self.in_fixed_point_cond = false;
                self.block(body);
                self.scopes.pop();
            }
            StmtKind::Batch {
                updates,
                size,
                body,
            } => {
                if self.forall_depth > 0 {
                    self.error(s.span, "Batch cannot appear inside forall");
                }
                if self.batch_depth > 0 {
                    self.error(s.span, "Batch blocks cannot be nested");
                }
                match self.lookup(updates) {
                    Some(id) => {
                        let t = self.table.binding(id).ty.clone();
                        if t != Type::Updates && t != Type::Unknown {
                            self.error(s.span, format!("`{updates}` is {t}, not an update list"));
                        }
                        self.table.stmt_bindings.insert(s.id, id);
                    }
                    None => self.error(s.span, format!("unknown identifier `{updates}`")),
                }
                let st = self.expr(size);
                if !st.is_integral() && st != Type::Unknown {
                    self.error(size.span, format!("batch size must be an integer, found {st}"));
                }
                self.batch_depth += 1;
                self.block(body);
                self.batch_depth -= 1;
            }
            StmtKind::OnAdd { var, source, body } | StmtKind::OnDelete { var, source, body } => {
                let which = if matches!(s.kind, StmtKind::OnAdd { .. }) {
                    "OnAdd"
                } else {
                    "OnDelete"
                };
                if self.batch_depth == 0 {
                    self.error(s.span, format!("{which} may only appear inside a Batch block"));
                }
                if self.forall_depth > 0 {
                    self.error(s.span, format!("{which} cannot appear inside forall"));
                }
                let st = self.expr(source);
                if !matches!(st, Type::Updates | Type::UpdateSet | Type::Unknown) {
                    self.error(source.span, format!("{which} iterates over updates, found {st}"));
                }
                self.forall_depth += 1;
                self.scoped_block(var, Type::Edge, BindingKind::LoopVar, s, body);
                self.forall_depth -= 1;
            }
            StmtKind::MinMax {
                targets, values, ..
            } => {
                let mut tys = Vec::new();
                for t in targets {
                    let ty = self.lvalue(t);
                    tys.push(ty);
                }
                if let Some(first) = tys.first() {
                    if !first.is_numeric() && *first != Type::Unknown {
                        self.error(targets[0].span, format!("Min/Max compares numbers, found {first}"));
                    }
                }
                for (v, ty) in values.iter().zip(&tys) {
                    let vt = self.expr(v);
                    if !ty.accepts(&vt) {
                        self.error(v.span, format!("cannot assign {vt} to {ty}"));
                    }
                }
            }
            StmtKind::Expr(e) => {
                if !matches!(e.kind, ExprKind::Call { .. } | ExprKind::Method { .. }) {
                    self.error(e.span, "expression statement has no effect");
                }
                self.expr(e);
            }
            StmtKind::Return(e) => {
                if self.forall_depth > 0 {
                    self.error(s.span, "return cannot appear inside forall");
                }
                let t = match e {
                    Some(e) => self.expr(e),
                    None => Type::Void,
                };
                self.returns.push((t, s.span));
            }
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn condition(&mut self, e: &Expr) {
        let t = self.expr(e);
        if t != Type::Bool && t != Type::Unknown {
            self.error(e.span, format!("condition must be bool, found {t}"));
        }
    }

    /// Type of an assignable location, reporting if it is not one.
    fn lvalue(&mut self, target: &Expr) -> Type {
        match &target.kind {
            ExprKind::Ident(name) => {
                let t = self.expr(target);
                if let Some(&id) = self.table.names.get(&target.id) {
                    let b = self.table.binding(id);
                    if !b.mutable && !b.ty.is_property() {
                        let msg = format!("`{name}` cannot be assigned");
                        self.error(target.span, msg);
                    }
                }
                t
            }
            ExprKind::Field(..) => {
                let t = self.expr(target);
                match self.table.accesses.get(&target.id) {
                    Some(Access::NodeProp(_) | Access::EdgeProp(_)) | None => {}
                    Some(_) => self.error(target.span, "edge endpoints and weights are read-only"),
                }
                t
            }
            _ => {
                self.error(target.span, "not an assignable location");
                self.expr(target)
            }
        }
    }

    fn assign(&mut self, target: &Expr, op: AssignOp, value: &Expr) {
        let tt = self.lvalue(target);
        let vt = self.expr(value);
        if tt.is_property() {
            if op != AssignOp::Set || tt != vt {
                self.error(value.span, format!("whole-property assignment needs another {tt}"));
            }
            return;
        }
        match op {
            AssignOp::Set => {
                if !tt.accepts(&vt) {
                    self.error(value.span, format!("cannot assign {vt} to {tt}"));
                }
            }
            _ => {
                if !tt.is_numeric() && tt != Type::Unknown {
                    self.error(target.span, format!("cannot accumulate into {tt}"));
                } else if !tt.accepts(&vt) {
                    self.error(value.span, format!("cannot accumulate {vt} into {tt}"));
                }
            }
        }
    }

    fn expr(&mut self, e: &Expr) -> Type {
        let t = self.expr_inner(e);
        self.table.expr_types.insert(e.id, t.clone());
        t
    }

    fn expr_inner(&mut self, e: &Expr) -> Type {
        match &e.kind {
            ExprKind::Int(v) => {
                if i32::try_from(*v).is_ok() {
                    Type::Int
                } else {
                    Type::Long
                }
            }
            ExprKind::Float(_) => Type::Double,
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Inf => Type::Inf,
            ExprKind::Ident(name) => self.ident(e, name),
            ExprKind::Unary(op, a) => {
                let t = self.expr(a);
                match op {
                    UnOp::Not if matches!(t, Type::Bool | Type::Unknown) => Type::Bool,
                    UnOp::Neg if t.is_numeric() || t == Type::Unknown => widen(&t, &Type::Int),
                    _ => {
                        self.error(e.span, format!("invalid operand {t} for unary operator"));
                        Type::Unknown
                    }
                }
            }
            ExprKind::Binary(op, a, b) => {
                let (ta, tb) = (self.expr(a), self.expr(b));
                self.binary(e.span, *op, &ta, &tb)
            }
            ExprKind::Field(recv, name) => self.field(e, recv, name),
            ExprKind::Method { recv, name, args } => self.method(e, recv, name, args),
            ExprKind::Call { name, args } => self.call(e, name, args),
        }
    }

    fn ident(&mut self, e: &Expr, name: &str) -> Type {
        let Some(id) = self.lookup(name) else {
            self.error(e.span, format!("unknown identifier `{name}`"));
            return Type::Unknown;
        };
        self.table.names.insert(e.id, id);
        let ty = self.table.binding(id).ty.clone();
        if let Type::PropNode(elem) = &ty {
            if let Some(var) = self.filter_var {
                if self.table.binding(var).ty == Type::Node {
                    self.table.accesses.insert(e.id, Access::LoopVarProp(id));
                    return (**elem).clone();
                }
            }
            if self.in_fixed_point_cond && **elem == Type::Bool {
                self.table.accesses.insert(e.id, Access::AnyNode(id));
                return Type::Bool;
            }
        }
        ty
    }

    fn binary(&mut self, span: Span, op: BinOp, a: &Type, b: &Type) -> Type {
        use Type::Unknown;
        if *a == Unknown || *b == Unknown {
            return if op.is_comparison() || op.is_logical() {
                Type::Bool
            } else {
                Unknown
            };
        }
        let ok = if op.is_logical() {
            *a == Type::Bool && *b == Type::Bool
        } else if op.is_comparison() {
            (a.is_numeric() && b.is_numeric())
                || (matches!(op, BinOp::Eq | BinOp::Ne) && a == b && a.is_scalar())
                || (matches!(op, BinOp::Eq | BinOp::Ne) && *a == Type::Bool && *b == Type::Bool)
        } else if op == BinOp::Rem {
            a.is_integral() && b.is_integral()
        } else {
            a.is_numeric() && b.is_numeric()
        };
        if !ok {
            self.error(
                span,
                format!("operator `{}` cannot combine {a} and {b}", op.symbol()),
            );
            return if op.is_comparison() || op.is_logical() {
                Type::Bool
            } else {
                Unknown
            };
        }
        if op.is_comparison() || op.is_logical() {
            Type::Bool
        } else {
            widen(a, b)
        }
    }

    fn field(&mut self, e: &Expr, recv: &Expr, name: &str) -> Type {
        let rt = self.expr(recv);
        match rt {
            Type::Edge => match name {
                "source" => {
                    self.table.accesses.insert(e.id, Access::EdgeSource);
                    return Type::Node;
                }
                "destination" => {
                    self.table.accesses.insert(e.id, Access::EdgeDestination);
                    return Type::Node;
                }
                "weight" => {
                    self.table.accesses.insert(e.id, Access::EdgeWeight);
                    return Type::Int;
                }
                _ => {}
            },
            Type::Node | Type::Unknown => {}
            other => {
                self.error(e.span, format!("{other} has no field `{name}`"));
                return Type::Unknown;
            }
        }
        let Some(id) = self.lookup(name) else {
            self.error(e.span, format!("unknown property `{name}`"));
            return Type::Unknown;
        };
        let pty = self.table.binding(id).ty.clone();
        match (&rt, &pty) {
            (Type::Node, Type::PropNode(t)) => {
                self.table.accesses.insert(e.id, Access::NodeProp(id));
                (**t).clone()
            }
            (Type::Edge, Type::PropEdge(t)) => {
                self.table.accesses.insert(e.id, Access::EdgeProp(id));
                (**t).clone()
            }
            (Type::Unknown, _) => pty.element().cloned().unwrap_or(Type::Unknown),
            _ => {
                self.error(e.span, format!("`{name}` is {pty}, not a property of {rt}"));
                Type::Unknown
            }
        }
    }

    fn check_args(&mut self, e: &Expr, what: &str, args: &[Arg], want: &[Type]) -> Vec<Type> {
        if args.len() != want.len() {
            self.error(
                e.span,
                format!("{what} takes {} argument(s), {} given", want.len(), args.len()),
            );
        }
        let mut got = Vec::new();
        for (i, a) in args.iter().enumerate() {
            if a.name.is_some() {
                self.error(a.value.span, format!("{what} does not take named arguments"));
            }
            let t = self.expr(&a.value);
            if let Some(w) = want.get(i) {
                let fits = if w.is_property() {
                    *w == t || t == Type::Unknown
                } else {
                    w.accepts(&t)
                };
                if !fits {
                    self.error(a.value.span, format!("{what}: expected {w}, found {t}"));
                }
            }
            got.push(t);
        }
        got
    }

    fn method(&mut self, e: &Expr, recv: &Expr, name: &str, args: &[Arg]) -> Type {
        let rt = self.expr(recv);
        let builtin = match rt {
            Type::Graph => Builtin::graph_method(name),
            Type::Updates if name == "currentBatch" => Some(Builtin::CurrentBatch),
            Type::Unknown => {
                for a in args {
                    self.expr(&a.value);
                }
                return Type::Unknown;
            }
            _ => None,
        };
        let Some(builtin) = builtin else {
            if name == "filter" {
                self.error(e.span, "`filter` is only allowed on a loop's iteration domain");
            } else {
                self.error(e.span, format!("{rt} has no method `{name}`"));
            }
            for a in args {
                self.expr(&a.value);
            }
            return Type::Unknown;
        };
        self.table.callees.insert(e.id, Callee::Builtin(builtin));
        let what = format!("`{name}`");
        use Builtin::*;
        match builtin {
            Nodes => {
                self.check_args(e, &what, args, &[]);
                Type::NodeSet
            }
            Neighbors | NodesTo => {
                self.check_args(e, &what, args, &[Type::Node]);
                Type::NodeSet
            }
            NumNodes | NumEdges => {
                self.check_args(e, &what, args, &[]);
                Type::Int
            }
            CountOutNbrs | CountInNbrs => {
                self.check_args(e, &what, args, &[Type::Node]);
                Type::Int
            }
            GetEdge => {
                self.check_args(e, &what, args, &[Type::Node, Type::Node]);
                Type::Edge
            }
            IsAnEdge => {
                self.check_args(e, &what, args, &[Type::Node, Type::Node]);
                Type::Bool
            }
            UpdateCsrAdd | UpdateCsrDel => {
                if self.forall_depth > 0 {
                    self.error(e.span, format!("{what} cannot be called inside forall"));
                }
                self.check_args(e, &what, args, &[Type::Updates]);
                Type::Void
            }
            PropagateNodeFlags => {
                self.check_args(e, &what, args, &[Type::PropNode(Box::new(Type::Bool))]);
                Type::Void
            }
            CurrentBatch => {
                if args.len() > 1 {
                    self.error(e.span, "`currentBatch` takes at most one argument");
                }
                for a in args {
                    let t = self.expr(&a.value);
                    if !t.is_integral() && t != Type::Unknown {
                        self.error(a.value.span, "`currentBatch` selector must be 0 or 1");
                    }
                    if !matches!(a.value.kind, ExprKind::Int(0 | 1)) {
                        self.error(a.value.span, "`currentBatch` selector must be the literal 0 or 1");
                    }
                }
                Type::UpdateSet
            }
            AttachNodeProperty | AttachEdgeProperty => {
                if self.forall_depth > 0 {
                    self.error(e.span, format!("{what} cannot be called inside forall"));
                }
                let node = builtin == AttachNodeProperty;
                let mut targets = Vec::new();
                if args.is_empty() {
                    self.error(e.span, format!("{what} needs at least one `prop = value` argument"));
                }
                for a in args {
                    let vt = self.expr(&a.value);
                    let Some(pname) = &a.name else {
                        self.error(a.value.span, format!("{what} arguments have the form `prop = value`"));
                        continue;
                    };
                    let Some(id) = self.lookup(pname) else {
                        self.error(a.value.span, format!("unknown property `{pname}`"));
                        continue;
                    };
                    let pty = self.table.binding(id).ty.clone();
                    match (&pty, node) {
                        (Type::PropNode(t), true) | (Type::PropEdge(t), false) => {
                            if !t.accepts(&vt) {
                                self.error(a.value.span, format!("cannot initialize {pty} `{pname}` with {vt}"));
                            }
                            targets.push(id);
                        }
                        _ => self.error(
                            a.value.span,
                            format!("`{pname}` is {pty}, which {what} cannot attach"),
                        ),
                    }
                }
                self.table.attach_targets.insert(e.id, targets);
                Type::Void
            }
            Abs => unreachable!(),
        }
    }

    fn call(&mut self, e: &Expr, name: &str, args: &[Arg]) -> Type {
        if name == "abs" {
            self.table.callees.insert(e.id, Callee::Builtin(Builtin::Abs));
            let got = self.check_args(e, "`abs`", args, &[Type::Double]);
            return match got.first() {
                Some(t) if t.is_numeric() => widen(t, &Type::Int),
                _ => Type::Unknown,
            };
        }
        let Some(sig) = self.table.signature(name).cloned() else {
            self.error(e.span, format!("unknown function `{name}`"));
            for a in args {
                self.expr(&a.value);
            }
            return Type::Unknown;
        };
        if sig.kind == FnKind::Dynamic {
            self.error(e.span, "the Dynamic driver cannot be called");
        }
        self.table.callees.insert(e.id, Callee::User(name.to_string()));
        let want: Vec<Type> = sig.params.iter().map(|p| p.1.clone()).collect();
        self.check_args(e, &format!("`{name}`"), args, &want);
        for (a, w) in args.iter().zip(&want) {
            if w.is_property() && a.value.as_ident().is_none() {
                self.error(a.value.span, "property arguments must be named directly");
            }
        }
        sig.ret
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn check(src: &str) -> Result<SymbolTable, Diagnostics> {
        typecheck(&parse_source(src).unwrap())
    }

    fn errors(src: &str) -> Vec<String> {
        check(src).unwrap_err().0.into_iter().map(|d| d.message).collect()
    }

    #[test]
    fn float_into_int_property_is_rejected() {
        let errs = errors(
            "function f(Graph g, propNode<int> dist) { forall (v in g.nodes()) { v.dist = 1.5; } }",
        );
        assert_eq!(errs.len(), 1);
        assert!(errs[0].contains("cannot assign double to int"), "{errs:?}");
    }

    #[test]
    fn on_add_outside_batch() {
        let errs = errors("function f(Graph g, updates<g> ub) { OnAdd (u in ub.currentBatch()) { } }");
        assert!(errs.iter().any(|m| m.contains("only appear inside a Batch")), "{errs:?}");
    }

    #[test]
    fn collects_every_error() {
        let errs = errors("function f() { x = 1; int y = True; z(); }");
        assert_eq!(errs.len(), 3, "{errs:?}");
    }

    #[test]
    fn duplicate_in_scope_and_shadowing() {
        assert!(check("function f() { int a = 1; { int a = 2; } }").is_ok());
        let errs = errors("function f() { int a = 1; int a = 2; }");
        assert!(errs[0].contains("already declared"));
    }

    #[test]
    fn arity_is_checked() {
        let errs = errors("function h(int a) { } function f(Graph g) { h(1, 2); g.neighbors(); }");
        assert_eq!(errs.len(), 2, "{errs:?}");
    }

    #[test]
    fn return_type_is_inferred_through_calls() {
        let t = check(
            "function f() { long c = 0; return g2() + c; } function g2() { return 3; }",
        )
        .unwrap();
        assert_eq!(t.signature("f").unwrap().ret, Type::Long);
        assert_eq!(t.signature("g2").unwrap().ret, Type::Int);
    }

    #[test]
    fn filter_and_fixed_point_names() {
        let t = check(
            "function f(Graph g, propNode<bool> modified) { \
               fixedPoint until (done: !modified) { \
                 forall (v in g.nodes().filter(modified == True)) { v.modified_nxt = False; } } }",
        )
        .unwrap();
        let kinds: Vec<_> = t.accesses.values().copied().collect();
        assert!(kinds.iter().any(|a| matches!(a, Access::AnyNode(_))));
        assert!(kinds.iter().any(|a| matches!(a, Access::LoopVarProp(_))));
        assert!(t
            .bindings
            .iter()
            .any(|b| b.name == "modified_nxt" && matches!(b.kind, BindingKind::Companion(_))));
    }

    #[test]
    fn update_fields_are_read_only() {
        let errs = errors(
            "Dynamic D(Graph g, updates<g> ub) { Batch(ub: 10) { OnAdd (u in ub.currentBatch()) { u.weight = 3; } } }",
        );
        assert!(errs[0].contains("read-only"), "{errs:?}");
    }

    #[test]
    fn structural_placement() {
        let errs = errors(
            "function f(Graph g) { forall (v in g.nodes()) { return; } }",
        );
        assert!(errs[0].contains("inside forall"));
    }
}
