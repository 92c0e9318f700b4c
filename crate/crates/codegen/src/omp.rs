//! The OpenMP emitter.

use graphdyn_dsl::ast::*;
use graphdyn_dsl::types::{Access, BindingId, BindingKind, Builtin, Callee, Type};
use graphdyn_dsl::{Compiled, Diagnostic, Diagnostics, Phase, Span};

use crate::plan::{AtomicLowering, AtomicSite, EmitPlan, LoopPlan};
use crate::{EmitOptions, Emitted, Schedule, HEADER_NAME};

const RESERVED: &[&str] = &[
    "alignas", "alignof", "and", "and_eq", "asm", "auto", "bitand", "bitor", "bool", "break",
    "case", "catch", "char", "char16_t", "char32_t", "class", "compl", "const", "constexpr",
    "const_cast", "continue", "decltype", "default", "delete", "do", "double", "dynamic_cast",
    "else", "enum", "explicit", "export", "extern", "false", "float", "for", "friend", "goto",
    "if", "inline", "int", "long", "mutable", "namespace", "new", "noexcept", "not", "not_eq",
    "nullptr", "operator", "or", "or_eq", "private", "protected", "public", "register",
    "reinterpret_cast", "return", "short", "signed", "sizeof", "static", "static_assert",
    "static_cast", "struct", "switch", "template", "this", "thread_local", "throw", "true",
    "try", "typedef", "typeid", "typename", "union", "unsigned", "using", "virtual", "void",
    "volatile", "wchar_t", "while", "xor", "xor_eq", "errno", "assert", "NULL", "EOF",
    "INT32_MAX", "INT32_MIN", "INT64_MAX", "INT64_MIN", "SIZE_MAX", "stdin", "stdout",
    "stderr", "rt", "std", "prog", "main", "argc", "argv", "int32_t", "int64_t", "uint8_t",
    "uint64_t", "size_t",
];

/// C++ spelling of a DSL name. Reserved words and the `_g` prefix used for
/// temporaries get a trailing underscore.
pub(crate) fn mangle(name: &str) -> String {
    if RESERVED.contains(&name) || name.starts_with("_g") {
        format!("{name}_")
    } else {
        name.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum K {
    Int,
    Long,
    Float,
    Double,
    Bool,
    Node,
    Edge,
}

impl K {
    fn of(t: &Type) -> Option<K> {
        Some(match t {
            Type::Int | Type::Inf => K::Int,
            Type::Long => K::Long,
            Type::Float => K::Float,
            Type::Double => K::Double,
            Type::Bool => K::Bool,
            Type::Node => K::Node,
            Type::Edge => K::Edge,
            _ => return None,
        })
    }

    fn cpp(self) -> &'static str {
        match self {
            K::Int | K::Node => "int32_t",
            K::Long => "int64_t",
            K::Float => "float",
            K::Double => "double",
            K::Bool => "bool",
            K::Edge => "rt::Edge",
        }
    }

    /// Storage type inside property vectors.
    fn cell(self) -> &'static str {
        match self {
            K::Bool => "uint8_t",
            k => k.cpp(),
        }
    }

    fn is_numeric(self) -> bool {
        !matches!(self, K::Bool | K::Edge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Selector {
    All,
    Deletes,
    Adds,
    Nothing,
}

impl Selector {
    fn and(self, other: Selector) -> Selector {
        match (self, other) {
            (Selector::All, s) | (s, Selector::All) => s,
            (a, b) if a == b => a,
            _ => Selector::Nothing,
        }
    }
}

enum Domain {
    Nodes { graph: String },
    Out { graph: String, center: String, incoming: bool, center_id: Option<BindingId> },
    Updates { updates: String, sel: Selector },
}

struct EdgeLoop {
    var: BindingId,
    center: Option<BindingId>,
    incoming: bool,
    edge: String,
}

pub(crate) struct Emitter<'c> {
    c: &'c Compiled,
    opts: &'c EmitOptions,
    out: String,
    depth: usize,
    diags: Vec<Diagnostic>,
    plan: EmitPlan,
    tmp: u32,
    func: String,
    graph: Option<String>,
    region: Option<Vec<String>>,
    loops: Vec<EdgeLoop>,
    filter_var: Option<String>,
    traversals: usize,
    batches: usize,
}

impl<'c> Emitter<'c> {
    pub(crate) fn new(c: &'c Compiled, opts: &'c EmitOptions) -> Self {
        Emitter {
            c,
            opts,
            out: String::new(),
            depth: 0,
            diags: Vec::new(),
            plan: EmitPlan {
                file_name: format!("{}_omp.cc", opts.name),
                ..EmitPlan::default()
            },
            tmp: 0,
            func: String::new(),
            graph: None,
            region: None,
            loops: Vec::new(),
            filter_var: None,
            traversals: 0,
            batches: 0,
        }
    }

    pub(crate) fn run(mut self) -> Result<Emitted, Diagnostics> {
        self.out.push_str(&format!(
            "// Generated by graphdyn-codegen {} from {}.sp. Do not edit.\n",
            env!("CARGO_PKG_VERSION"),
            self.opts.name
        ));
        self.out.push_str(&format!("#include \"{HEADER_NAME}\"\n\nnamespace prog {{\n\n"));
        let program = &self.c.program;
        for f in &program.functions {
            let sig = self.signature(f);
            self.line(format!("{sig};"));
        }
        for f in &program.functions {
            self.out.push('\n');
            self.function(f);
        }
        self.out.push_str("\n}  // namespace prog\n\n");
        self.main();
        if let Some(id) = self.plan.uncovered(&self.c.access).first() {
            self.error(Span::default(), format!("statement {} has no atomic lowering", id.0));
        }
        if self.diags.is_empty() {
            Ok(Emitted {
                file_name: self.plan.file_name.clone(),
                source: self.out,
                plan: self.plan,
            })
        } else {
            Err(Diagnostics(self.diags))
        }
    }

    // ---- helpers ----

    fn line(&mut self, s: impl AsRef<str>) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str(s.as_ref());
        self.out.push('\n');
    }

    fn open(&mut self, s: impl AsRef<str>) {
        self.line(s);
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        self.line("}");
    }

    fn fresh(&mut self) -> String {
        self.tmp += 1;
        format!("_g{}", self.tmp)
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::new(Phase::Codegen, span, msg));
    }

    fn binding_ty(&self, id: BindingId) -> &Type {
        &self.c.symbols.binding(id).ty
    }

    fn name(&self, id: BindingId) -> String {
        mangle(&self.c.symbols.binding(id).name)
    }

    fn companion_base(&self, id: BindingId) -> Option<BindingId> {
        match self.c.symbols.binding(id).kind {
            BindingKind::Companion(base) => Some(base),
            _ => None,
        }
    }

    /// The vector holding every element of property `id`.
    fn prop_vec(&self, id: BindingId) -> String {
        match self.companion_base(id) {
            Some(base) => format!("{}.nxt", self.name(base)),
            None => format!("{}.cur", self.name(id)),
        }
    }

    fn prop_at(&self, id: BindingId, index: &str) -> String {
        match self.companion_base(id) {
            Some(base) => format!("{}.nxt_at({index})", self.name(base)),
            None => format!("{}.at({index})", self.name(id)),
        }
    }

    fn elem_kind(&self, id: BindingId) -> K {
        self.binding_ty(id).element().and_then(K::of).unwrap_or(K::Int)
    }

    fn kind(&mut self, e: &Expr) -> K {
        let t = self.c.symbols.type_of(e).clone();
        match K::of(&t) {
            Some(k) => k,
            None => {
                self.error(e.span, format!("{t} values cannot be lowered to C++"));
                K::Int
            }
        }
    }

    fn ident_binding(&self, e: &Expr) -> Option<BindingId> {
        self.c.symbols.names.get(&e.id).copied()
    }

    fn ident_name(&mut self, e: &Expr) -> String {
        match self.ident_binding(e) {
            Some(id) => self.name(id),
            None => {
                self.error(e.span, "expected a name");
                "_gmissing".into()
            }
        }
    }

    fn prop_binding(&mut self, e: &Expr) -> Option<BindingId> {
        let id = self.ident_binding(e).filter(|id| self.binding_ty(*id).is_property());
        if id.is_none() {
            self.error(e.span, "expected a property name");
        }
        id
    }

    fn flagged(&self, s: &Stmt) -> bool {
        self.c.access.needs_atomic(s.id)
    }

    fn record(&mut self, s: &Stmt, lowering: AtomicLowering, target: &str) {
        if self.flagged(s) {
            self.plan.atomics.insert(
                s.id,
                AtomicSite {
                    function: self.func.clone(),
                    line: s.span.line,
                    lowering,
                    target: target.to_string(),
                },
            );
        }
    }

    // ---- functions ----

    fn param_decl(&mut self, name: &str, ty: &Type, span: Span) -> String {
        let n = mangle(name);
        match ty {
            Type::Graph => format!("rt::Graph& {n}"),
            Type::Updates => format!("rt::Updates& {n}"),
            Type::PropNode(t) | Type::PropEdge(t) => {
                let cell = match K::of(t) {
                    Some(k) => k.cell(),
                    None => {
                        self.error(span, format!("properties of {t} cannot be lowered to C++"));
                        "int32_t"
                    }
                };
                let wrap = if matches!(ty, Type::PropNode(_)) { "NodeProp" } else { "EdgeProp" };
                format!("rt::{wrap}<{cell}>& {n}")
            }
            t => match K::of(t) {
                Some(k) => format!("{} {n}", k.cpp()),
                None => {
                    self.error(span, format!("parameters of type {t} cannot be lowered to C++"));
                    format!("int32_t {n}")
                }
            },
        }
    }

    fn ret_kind(&self, name: &str) -> Option<K> {
        self.c.symbols.signature(name).and_then(|s| K::of(&s.ret))
    }

    fn signature(&mut self, f: &Function) -> String {
        let ret = self.ret_kind(&f.name).map_or("void", K::cpp);
        let params: Vec<String> = f
            .params
            .iter()
            .map(|p| self.param_decl(&p.name, &Type::from_expr(&p.ty), p.span))
            .collect();
        format!("{ret} {}({})", mangle(&f.name), params.join(", "))
    }

    fn function(&mut self, f: &Function) {
        self.func = f.name.clone();
        self.tmp = 0;
        self.region = None;
        self.loops.clear();
        self.traversals = 0;
        self.batches = 0;
        self.graph = f
            .params
            .iter()
            .find(|p| p.ty == TypeExpr::Graph)
            .map(|p| mangle(&p.name));
        let sig = self.signature(f);
        self.open(format!("{sig} {{"));
        self.block_body(&f.body);
        if let Some(k) = self.ret_kind(&f.name) {
            self.line(format!("return {}{{}};", k.cpp()));
        }
        self.close();
    }

    fn main(&mut self) {
        let program = &self.c.program;
        let Some(entry) = program.entry().or_else(|| program.static_entry()) else {
            self.error(Span::default(), "the program has no Dynamic or Static function to run");
            return;
        };
        self.func = "main".into();
        self.open("int main(int argc, char** argv) {");
        self.line("const rt::Args _gargs(argc, argv);");
        let params: Vec<(String, Type, Span)> = entry
            .params
            .iter()
            .map(|p| (p.name.clone(), Type::from_expr(&p.ty), p.span))
            .collect();
        let mut graph: Option<String> = None;
        for (name, ty, span) in &params {
            if *ty == Type::Graph {
                if graph.is_some() {
                    self.error(*span, "the entry function may take only one graph");
                    continue;
                }
                let n = mangle(name);
                self.line(format!("rt::Graph {n};"));
                self.line(format!("rt::load_graph(_gargs, &{n});"));
                graph = Some(n);
            }
        }
        let mut call = Vec::new();
        let mut outputs = Vec::new();
        for (name, ty, span) in &params {
            let n = mangle(name);
            call.push(n.clone());
            let need_graph = |me: &mut Self| -> String {
                graph.clone().unwrap_or_else(|| {
                    me.error(*span, format!("`{name}` needs a graph parameter"));
                    "_gnograph".into()
                })
            };
            match ty {
                Type::Graph => {}
                Type::Updates => {
                    let g = need_graph(self);
                    self.line(format!("rt::Updates {n};"));
                    self.line(format!("rt::load_updates(_gargs, {g}, &{n});"));
                }
                Type::PropNode(t) | Type::PropEdge(t) => {
                    let g = need_graph(self);
                    let cell = K::of(t).map_or("int32_t", K::cell);
                    let wrap = if matches!(ty, Type::PropNode(_)) { "NodeProp" } else { "EdgeProp" };
                    self.line(format!("rt::{wrap}<{cell}> {n}({g});"));
                    if matches!(ty, Type::PropNode(_)) {
                        outputs.push((name.clone(), n));
                    }
                }
                Type::Node => {
                    let g = need_graph(self);
                    self.line(format!("const int32_t {n} = _gargs.node(\"{name}\", {g});"));
                }
                t => match K::of(t) {
                    Some(k) if k != K::Edge => {
                        let c = k.cpp();
                        self.line(format!("const {c} {n} = _gargs.scalar<{c}>(\"{name}\");"));
                    }
                    _ => self.error(*span, format!("entry parameter `{name}` of type {t} cannot be supplied on the command line")),
                },
            }
        }
        let callee = format!("prog::{}({})", mangle(&entry.name), call.join(", "));
        let ret = self.ret_kind(&entry.name);
        match ret {
            Some(k) => self.line(format!("const {} _gret = {callee};", k.cpp())),
            None => self.line(format!("{callee};")),
        }
        self.line("rt::Output _gout(_gargs);");
        for (name, n) in outputs {
            self.line(format!("_gout.node_prop(\"{name}\", {n}.cur);"));
        }
        if ret.is_some() {
            self.line("_gout.scalar(\"return\", _gret);");
        }
        self.line("_gout.finish();");
        self.line("return 0;");
        self.close();
    }

    // ---- statements ----

    fn block_body(&mut self, b: &Block) {
        for s in &b.stmts {
            self.stmt(s);
        }
    }

    fn block(&mut self, b: &Block) {
        self.open("{");
        self.block_body(b);
        self.close();
    }

    fn forbid_in_region(&mut self, s: &Stmt, what: &str) -> bool {
        if self.region.is_some() {
            self.error(s.span, format!("{what} cannot appear inside a parallel loop"));
            return true;
        }
        false
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Decl { ty, init, .. } => self.decl(s, ty, init.as_ref()),
            StmtKind::Assign { target, op, value } => self.assign(s, target, *op, value),
            StmtKind::MinMax {
                kind,
                targets,
                values,
            } => self.min_max(s, *kind, targets, values),
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                let c = self.expr_as(cond, K::Bool);
                self.open(format!("if ({}) {{", strip_parens(&c)));
                self.block_body(then);
                if let Some(o) = otherwise {
                    self.depth -= 1;
                    self.line("} else {");
                    self.depth += 1;
                    self.block_body(o);
                }
                self.close();
            }
            StmtKind::While { cond, body } => {
                let c = self.expr_as(cond, K::Bool);
                self.open(format!("while ({}) {{", strip_parens(&c)));
                self.block_body(body);
                self.close();
            }
            StmtKind::For { iter, body, .. } => {
                self.lp(s, &iter.source, iter.filter.as_ref(), body, false, None)
            }
            StmtKind::ForAll {
                iter,
                body,
                parallel,
                ..
            } => self.lp(s, &iter.source, iter.filter.as_ref(), body, *parallel, None),
            StmtKind::OnAdd { source, body, .. } => {
                self.lp(s, source, None, body, true, Some(Selector::Adds))
            }
            StmtKind::OnDelete { source, body, .. } => {
                self.lp(s, source, None, body, true, Some(Selector::Deletes))
            }
            StmtKind::FixedPoint { cond, body, .. } => self.fixed_point(s, cond, body),
            StmtKind::Batch {
                updates,
                size,
                body,
            } => self.batch(s, updates, size, body),
            StmtKind::Expr(e) => self.effect(s, e),
            StmtKind::Return(e) => {
                if self.forbid_in_region(s, "Return") {
                    return;
                }
                if self.batches > 0 {
                    self.error(s.span, "Return inside a Batch block is not supported by the OpenMP backend");
                    return;
                }
                match (e, self.ret_kind(&self.func.clone())) {
                    (Some(e), Some(k)) => {
                        let v = self.expr_as(e, k);
                        self.line(format!("return {};", strip_parens(&v)));
                    }
                    (Some(e), None) => {
                        let (v, _) = self.expr(e);
                        self.line(format!("{v};"));
                        self.line("return;");
                    }
                    (None, Some(k)) => self.line(format!("return {}{{}};", k.cpp())),
                    (None, None) => self.line("return;"),
                }
            }
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn decl(&mut self, s: &Stmt, ty: &TypeExpr, init: Option<&Expr>) {
        let Some(&id) = self.c.symbols.decls.get(&s.id) else {
            self.error(s.span, "unresolved declaration");
            return;
        };
        let n = self.name(id);
        let t = Type::from_expr(ty);
        match &t {
            Type::PropNode(_) | Type::PropEdge(_) => {
                if self.forbid_in_region(s, "a property declaration") {
                    return;
                }
                let Some(g) = self.graph.clone() else {
                    self.error(s.span, "declaring a property needs a graph parameter");
                    return;
                };
                let cell = self.elem_kind(id).cell();
                let wrap = if matches!(t, Type::PropNode(_)) { "NodeProp" } else { "EdgeProp" };
                self.line(format!("rt::{wrap}<{cell}> {n}({g});"));
            }
            t => {
                let Some(k) = K::of(t) else {
                    self.error(s.span, format!("variables of type {t} cannot be lowered to C++"));
                    return;
                };
                let v = match init {
                    Some(e) => self.expr_as(e, k),
                    None => zero(k).to_string(),
                };
                self.line(format!("{} {n} = {};", k.cpp(), strip_parens(&v)));
            }
        }
    }

    /// Lvalue, element kind and, for plain variables, the binding.
    fn place(&mut self, target: &Expr) -> Option<(String, K, Option<BindingId>)> {
        match &target.kind {
            ExprKind::Ident(_) => {
                let id = self.ident_binding(target)?;
                let k = K::of(self.binding_ty(id))?;
                Some((self.name(id), k, Some(id)))
            }
            ExprKind::Field(recv, _) => match self.c.symbols.accesses.get(&target.id).copied() {
                Some(Access::NodeProp(id)) => {
                    let idx = self.expr_as(recv, K::Node);
                    Some((self.prop_at(id, strip_parens(&idx)), self.elem_kind(id), None))
                }
                Some(Access::EdgeProp(id)) => {
                    let e = self.expr_as(recv, K::Edge);
                    Some((self.prop_at(id, strip_parens(&e)), self.elem_kind(id), None))
                }
                _ => None,
            },
            _ => None,
        }
    }

    fn assign(&mut self, s: &Stmt, target: &Expr, op: AssignOp, value: &Expr) {
        if self.c.symbols.type_of(target).is_property() {
            if self.forbid_in_region(s, "a property copy") {
                return;
            }
            let (Some(dst), Some(src)) = (self.prop_binding(target), self.prop_binding(value)) else {
                return;
            };
            let (d, r) = (self.prop_vec(dst), self.prop_vec(src));
            self.line(format!("rt::copy({d}, {r});"));
            return;
        }
        let Some((lv, k, var)) = self.place(target) else {
            self.error(target.span, "not an assignable location");
            return;
        };
        let v = self.expr_as(value, k);
        let v = strip_parens(&v).to_string();
        let tag = format!("  // line {}", s.span.line);
        let flagged = self.flagged(s);
        if op == AssignOp::Set {
            if !flagged {
                self.line(format!("{lv} = {v};"));
            } else if k == K::Edge {
                self.line(format!("#pragma omp critical{tag}"));
                self.line(format!("{lv} = {v};"));
                self.record(s, AtomicLowering::Critical, &lv);
            } else {
                self.line(format!("rt::atomic_store(&{lv}, {v});{tag}"));
                self.record(s, AtomicLowering::Store, &lv);
            }
            return;
        }
        let f = if op == AssignOp::Sub { "sub" } else { "add" };
        let shared = var.is_some_and(|id| !self.c.symbols.binding(id).private);
        if let (Some(reds), true) = (&mut self.region, shared) {
            if !reds.contains(&lv) {
                reds.push(lv.clone());
            }
            self.line(format!("{lv} = rt::{f}<{}>({lv}, {v});", k.cpp()));
            self.record(s, AtomicLowering::ReductionClause, &lv);
        } else if flagged {
            self.line(format!("rt::atomic_{f}(&{lv}, {v});{tag}"));
            self.record(s, AtomicLowering::FetchOp, &lv);
        } else {
            self.line(format!("{lv} = rt::{f}<{}>({lv}, {v});", k.cpp()));
        }
    }

    fn min_max(&mut self, s: &Stmt, kind: MinMaxKind, targets: &[Expr], values: &[Expr]) {
        let mut places = Vec::new();
        for t in targets {
            match self.place(t) {
                Some(p) => places.push(p),
                None => {
                    self.error(t.span, "not an assignable location");
                    return;
                }
            }
        }
        let cmp = if kind == MinMaxKind::Min { "<" } else { ">" };
        self.open("{");
        let mut temps = Vec::new();
        for ((_, k, _), v) in places.iter().zip(values) {
            let x = self.expr_as(v, *k);
            let t = self.fresh();
            self.line(format!("{} {t} = {};", k.cell(), strip_parens(&x)));
            temps.push(t);
        }
        let (guard, gk, _) = places[0].clone();
        if !self.flagged(s) {
            self.open(format!("if ({} {cmp} {guard}) {{", temps[0]));
            for ((lv, _, _), t) in places.iter().zip(&temps) {
                self.line(format!("{lv} = {t};"));
            }
            self.close();
            self.close();
            return;
        }
        if !gk.is_numeric() && gk != K::Bool {
            self.error(s.span, "Min/Max on edge values cannot be lowered to an atomic update");
        }
        if places.len() > 1 {
            let lock = self.fresh();
            self.line(format!("std::lock_guard<std::mutex> {lock}(rt::stripe(&{guard}));"));
        }
        let (p, old) = (self.fresh(), self.fresh());
        self.line(format!("{}* const {p} = &{guard};", gk.cell()));
        self.line(format!("{} {old} = rt::atomic_load({p});", gk.cell()));
        let cas = format!(
            "__atomic_compare_exchange({p}, &{old}, &{}, true, __ATOMIC_ACQ_REL, __ATOMIC_RELAXED)",
            temps[0]
        );
        if places.len() == 1 {
            self.open(format!("while ({} {cmp} {old}) {{", temps[0]));
            self.line(format!("if ({cas}) break;  // line {}", s.span.line));
            self.close();
        } else {
            let won = self.fresh();
            self.line(format!("bool {won} = false;"));
            self.open(format!("while ({} {cmp} {old}) {{", temps[0]));
            self.open(format!("if ({cas}) {{  // line {}", s.span.line));
            self.line(format!("{won} = true;"));
            self.line("break;");
            self.close();
            self.close();
            self.open(format!("if ({won}) {{"));
            for ((lv, _, _), t) in places.iter().zip(&temps).skip(1) {
                self.line(format!("rt::atomic_store(&{lv}, {t});"));
            }
            self.close();
        }
        self.close();
        self.record(s, AtomicLowering::RetryLoop, &guard);
    }

    fn companions_written(&self, body: &Block) -> Vec<BindingId> {
        let mut out = Vec::new();
        let mut note = |t: &Expr| {
            if let Some(Access::NodeProp(id) | Access::EdgeProp(id)) = self.c.symbols.accesses.get(&t.id) {
                if self.companion_base(*id).is_some() && !out.contains(id) {
                    out.push(*id);
                }
            }
        };
        body.walk(&mut |s| match &s.kind {
            StmtKind::Assign { target, .. } => note(target),
            StmtKind::MinMax { targets, .. } => targets.iter().for_each(&mut note),
            _ => {}
        });
        out
    }

    fn fixed_point(&mut self, s: &Stmt, cond: &Expr, body: &Block) {
        if self.forbid_in_region(s, "fixedPoint") {
            return;
        }
        let Some(&id) = self.c.symbols.stmt_bindings.get(&s.id) else {
            self.error(s.span, "unresolved fixedPoint variable");
            return;
        };
        let var = self.name(id);
        let it = self.fresh();
        self.open("{");
        self.line(format!("bool {var} = false;"));
        self.line(format!("uint64_t {it} = 0;"));
        self.open("while (true) {");
        let c = self.expr_as(cond, K::Bool);
        self.line(format!("{var} = {};", strip_parens(&c)));
        self.line(format!("if ({var}) break;"));
        self.line(format!("if ({it} >= rt::cap()) rt::cap_exceeded({});", s.span.line));
        self.block_body(body);
        for comp in self.companions_written(body) {
            if let Some(base) = self.companion_base(comp) {
                let b = self.name(base);
                self.line(format!("rt::advance({b}.cur, {b}.nxt);"));
            }
        }
        self.line(format!("++{it};"));
        self.close();
        self.close();
    }

    fn updates_named(&self, name: &str) -> Option<BindingId> {
        self.c
            .symbols
            .bindings
            .iter()
            .position(|b| b.function == self.func && b.name == name && b.ty == Type::Updates)
            .map(|i| BindingId(i as u32))
    }

    fn batch(&mut self, s: &Stmt, updates: &str, size: &Expr, body: &Block) {
        if self.forbid_in_region(s, "Batch") {
            return;
        }
        if self.traversals > 0 {
            self.error(s.span, "Batch cannot appear inside a neighbor or update loop");
            return;
        }
        let Some(g) = self.graph.clone() else {
            self.error(s.span, "Batch needs a graph parameter");
            return;
        };
        let Some(uid) = self.updates_named(updates) else {
            self.error(s.span, format!("`{updates}` is not an update stream"));
            return;
        };
        let u = self.name(uid);
        let sz = self.expr_as(size, K::Long);
        let (n, lo) = (self.fresh(), self.fresh());
        self.open("{");
        self.line(format!("const int64_t {n} = {};", strip_parens(&sz)));
        self.line(format!(
            "if ({n} <= 0) rt::fail(\"batch size must be positive, got \" + std::to_string({n}));"
        ));
        self.open(format!("for (size_t {lo} = 0; {lo} < {u}.records.size(); {lo} = {u}.hi) {{"));
        self.line(format!(
            "{u}.enter({lo}, {u}.records.size() - {lo} > static_cast<uint64_t>({n}) ? {lo} + static_cast<size_t>({n}) : {u}.records.size());"
        ));
        self.batches += 1;
        self.block_body(body);
        self.batches -= 1;
        self.line(format!("{g}.finish_batch();"));
        self.close();
        self.line(format!("{u}.leave();"));
        self.close();
    }

    fn effect(&mut self, s: &Stmt, e: &Expr) {
        let callee = self.c.symbols.callees.get(&e.id).cloned();
        let (recv, args) = match &e.kind {
            ExprKind::Method { recv, args, .. } => (&**recv, args),
            _ => {
                let (v, _) = self.expr(e);
                self.line(format!("{};", strip_parens(&v)));
                return;
            }
        };
        match callee {
            Some(Callee::Builtin(b @ (Builtin::UpdateCsrAdd | Builtin::UpdateCsrDel))) => {
                if self.forbid_in_region(s, "a structural update") {
                    return;
                }
                if self.traversals > 0 {
                    self.error(s.span, "structural updates cannot appear inside a neighbor or update loop");
                    return;
                }
                let g = self.ident_name(recv);
                let u = self.ident_name(&args[0].value);
                let f = if b == Builtin::UpdateCsrAdd { "add" } else { "del" };
                self.line(format!("{g}.update_csr_{f}({u}.window());"));
            }
            Some(Callee::Builtin(Builtin::PropagateNodeFlags)) => {
                if self.forbid_in_region(s, "propagateNodeFlags") {
                    return;
                }
                let g = self.ident_name(recv);
                let Some(p) = self.prop_binding(&args[0].value) else { return };
                let v = self.prop_vec(p);
                self.line(format!("rt::propagate({g}, {v});"));
            }
            Some(Callee::Builtin(Builtin::AttachNodeProperty | Builtin::AttachEdgeProperty)) => {
                if self.forbid_in_region(s, "attaching a property") {
                    return;
                }
                let ids = self.c.symbols.attach_targets.get(&e.id).cloned().unwrap_or_default();
                for (id, a) in ids.into_iter().zip(args) {
                    let k = self.elem_kind(id);
                    let v = self.expr_as(&a.value, k);
                    let vec = self.prop_vec(id);
                    self.line(format!("rt::fill({vec}, {});", strip_parens(&v)));
                }
            }
            _ => {
                let (v, _) = self.expr(e);
                self.line(format!("{};", strip_parens(&v)));
            }
        }
    }

    // ---- loops ----

    fn domain(&mut self, source: &Expr, on_update: Option<Selector>) -> Option<Domain> {
        let callee = self.c.symbols.callees.get(&source.id).cloned();
        let d = match (callee, &source.kind) {
            (Some(Callee::Builtin(Builtin::Nodes)), ExprKind::Method { recv, .. }) => Domain::Nodes {
                graph: self.ident_name(recv),
            },
            (Some(Callee::Builtin(b @ (Builtin::Neighbors | Builtin::NodesTo))), ExprKind::Method { recv, args, .. }) => {
                let arg = &args[0].value;
                let center_id = self
                    .ident_binding(arg)
                    .filter(|id| !self.c.symbols.binding(*id).mutable);
                let c = self.expr_as(arg, K::Node);
                Domain::Out {
                    graph: self.ident_name(recv),
                    center: strip_parens(&c).to_string(),
                    incoming: b == Builtin::NodesTo,
                    center_id,
                }
            }
            (Some(Callee::Builtin(Builtin::CurrentBatch)), ExprKind::Method { recv, args, .. }) => Domain::Updates {
                updates: self.ident_name(recv),
                sel: match args.first().map(|a| &a.value.kind) {
                    Some(ExprKind::Int(0)) => Selector::Deletes,
                    Some(ExprKind::Int(1)) => Selector::Adds,
                    _ => Selector::All,
                },
            },
            (_, ExprKind::Ident(_)) if *self.c.symbols.type_of(source) == Type::Updates => Domain::Updates {
                updates: self.ident_name(source),
                sel: Selector::All,
            },
            _ => {
                self.error(source.span, "unsupported loop domain");
                return None;
            }
        };
        Some(match (d, on_update) {
            (Domain::Updates { updates, sel }, Some(o)) => Domain::Updates {
                updates,
                sel: sel.and(o),
            },
            (d, _) => d,
        })
    }

    fn lp(
        &mut self,
        s: &Stmt,
        source: &Expr,
        filter: Option<&Expr>,
        body: &Block,
        parallel: bool,
        on_update: Option<Selector>,
    ) {
        let Some(&var_id) = self.c.symbols.stmt_bindings.get(&s.id) else {
            self.error(s.span, "unresolved loop variable");
            return;
        };
        let var = self.name(var_id);
        let Some(domain) = self.domain(source, on_update) else {
            return;
        };
        let opens = parallel && self.region.is_none();
        let pos_depth = self.depth;
        let mut pos = 0;
        let mut traverses = false;
        let mut edge_loop = None;
        let mut scoped = false;
        match domain {
            Domain::Nodes { graph } => {
                pos = self.out.len();
                self.open(format!("for (int32_t {var} = 0; {var} < {graph}.num_nodes(); ++{var}) {{"));
            }
            Domain::Out {
                graph,
                center,
                incoming,
                center_id,
            } => {
                traverses = true;
                let edge = self.fresh();
                let (list, range) = if incoming { ("in_list", "in") } else { ("out_list", "out") };
                let end = if incoming { "source" } else { "destination" };
                if opens {
                    let (l, i) = (self.fresh(), self.fresh());
                    self.open("{");
                    scoped = true;
                    self.line(format!("const std::vector<rt::Edge> {l} = {graph}.{list}({center});"));
                    pos = self.out.len();
                    self.open(format!("for (size_t {i} = 0; {i} < {l}.size(); ++{i}) {{"));
                    self.line(format!("const rt::Edge& {edge} = {l}[{i}];"));
                } else {
                    self.open(format!("for (const rt::Edge& {edge} : {graph}.{range}({center})) {{"));
                }
                self.line(format!("const int32_t {var} = {edge}.{end};"));
                edge_loop = Some(EdgeLoop {
                    var: var_id,
                    center: center_id,
                    incoming,
                    edge,
                });
            }
            Domain::Updates { updates, sel } => {
                traverses = true;
                let (w, i, r) = (self.fresh(), self.fresh(), self.fresh());
                self.open("{");
                scoped = true;
                self.line(format!("const rt::Window {w} = {updates}.window();"));
                pos = self.out.len();
                self.open(format!("for (size_t {i} = 0; {i} < {w}.size(); ++{i}) {{"));
                self.line(format!("const rt::Update& {r} = {w}[{i}];"));
                match sel {
                    Selector::All => {}
                    Selector::Deletes => self.line(format!("if (!{r}.is_delete()) continue;")),
                    Selector::Adds => self.line(format!("if (!{r}.is_add()) continue;")),
                    Selector::Nothing => self.line("continue;"),
                }
                self.line(format!("const rt::Edge {var} = {r}.edge();"));
            }
        }
        if let Some(f) = filter {
            let saved = self.filter_var.replace(var.clone());
            let c = self.expr_as(f, K::Bool);
            self.filter_var = saved;
            self.line(format!("if (!{}) continue;", paren(&c)));
        }
        if opens {
            self.region = Some(Vec::new());
        }
        if traverses {
            self.traversals += 1;
        }
        let pushed = edge_loop.is_some();
        if let Some(l) = edge_loop {
            self.loops.push(l);
        }
        self.block_body(body);
        if pushed {
            self.loops.pop();
        }
        if traverses {
            self.traversals -= 1;
        }
        self.close();
        if opens {
            let reductions = self.region.take().unwrap_or_default();
            let schedule = match self.opts.schedule {
                Schedule::Dynamic => "schedule(dynamic, 64)",
                Schedule::Static => "schedule(static)",
            };
            let mut pragma = format!("#pragma omp parallel for {schedule}");
            if !reductions.is_empty() {
                pragma.push_str(&format!(" reduction(+: {})", reductions.join(", ")));
            }
            let indent = "  ".repeat(pos_depth + usize::from(scoped));
            self.out.insert_str(pos, &format!("{indent}{pragma}\n"));
            self.plan.loops.push(LoopPlan {
                function: self.func.clone(),
                line: s.span.line,
                construct: match s.kind {
                    StmtKind::OnAdd { .. } => "OnAdd",
                    StmtKind::OnDelete { .. } => "OnDelete",
                    _ => "ForAll",
                },
                pragma,
                reductions,
            });
        }
        if scoped {
            self.close();
        }
    }

    // ---- expressions ----

    fn expr_as(&mut self, e: &Expr, want: K) -> String {
        match &e.kind {
            ExprKind::Inf => return format!("rt::inf<{}>()", want.cpp()),
            ExprKind::Int(v) if want.is_numeric() && !self.c.symbols.accesses.contains_key(&e.id) => {
                return int_literal(*v, want);
            }
            _ => {}
        }
        let (s, have) = self.expr(e);
        convert(s, have, want)
    }

    fn expr(&mut self, e: &Expr) -> (String, K) {
        if let Some(access) = self.c.symbols.accesses.get(&e.id).copied() {
            return self.access(e, access);
        }
        match &e.kind {
            ExprKind::Int(v) => {
                let k = self.kind(e);
                (int_literal(*v, k), k)
            }
            ExprKind::Float(v) => (float_literal(*v), K::Double),
            ExprKind::Bool(b) => (b.to_string(), K::Bool),
            ExprKind::Inf => ("rt::inf<int32_t>()".into(), K::Int),
            ExprKind::Ident(name) => match self.ident_binding(e) {
                Some(id) => match K::of(self.binding_ty(id)) {
                    Some(k) => (self.name(id), k),
                    None => {
                        self.error(e.span, format!("`{name}` cannot be used as a value here"));
                        (self.name(id), K::Int)
                    }
                },
                None => {
                    self.error(e.span, format!("unresolved name `{name}`"));
                    ("0".into(), K::Int)
                }
            },
            ExprKind::Unary(UnOp::Not, a) => {
                let x = self.expr_as(a, K::Bool);
                (format!("!{}", paren(&x)), K::Bool)
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let k = self.kind(e);
                let x = self.expr_as(a, k);
                let literal = matches!(a.kind, ExprKind::Int(_) | ExprKind::Float(_))
                    && x.starts_with(|c: char| c.is_ascii_digit() || c == 'I');
                if literal {
                    (format!("(-{x})"), k)
                } else {
                    (format!("rt::neg<{}>({})", k.cpp(), strip_parens(&x)), k)
                }
            }
            ExprKind::Binary(op, a, b) => self.binary(e, *op, a, b),
            ExprKind::Field(..) => {
                self.error(e.span, "unresolved field");
                ("0".into(), K::Int)
            }
            ExprKind::Method { recv, args, .. } => {
                let Some(Callee::Builtin(b)) = self.c.symbols.callees.get(&e.id).cloned() else {
                    self.error(e.span, "unresolved method");
                    return ("0".into(), K::Int);
                };
                self.builtin(e, b, recv, args)
            }
            ExprKind::Call { name, args } => match self.c.symbols.callees.get(&e.id).cloned() {
                Some(Callee::Builtin(Builtin::Abs)) => {
                    let k = self.kind(e);
                    let x = self.expr_as(&args[0].value, k);
                    (format!("rt::abs_<{}>({})", k.cpp(), strip_parens(&x)), k)
                }
                Some(Callee::User(f)) => self.call(e, &f, args),
                _ => {
                    self.error(e.span, format!("unresolved call to `{name}`"));
                    ("0".into(), K::Int)
                }
            },
        }
    }

    fn call(&mut self, e: &Expr, f: &str, args: &[Arg]) -> (String, K) {
        let Some(sig) = self.c.symbols.signature(f).cloned() else {
            self.error(e.span, format!("unknown function `{f}`"));
            return ("0".into(), K::Int);
        };
        let mut out = Vec::new();
        for (a, (_, pt)) in args.iter().zip(&sig.params) {
            out.push(match pt {
                Type::Graph | Type::Updates => self.ident_name(&a.value),
                t if t.is_property() => match self.prop_binding(&a.value) {
                    Some(id) if self.companion_base(id).is_some() => {
                        self.error(a.value.span, "a `_nxt` companion cannot be passed as an argument");
                        self.name(id)
                    }
                    Some(id) => self.name(id),
                    None => "_gmissing".into(),
                },
                t => {
                    let k = K::of(t).unwrap_or(K::Int);
                    let v = self.expr_as(&a.value, k);
                    strip_parens(&v).to_string()
                }
            });
        }
        let k = K::of(&sig.ret).unwrap_or(K::Int);
        (format!("{}({})", mangle(f), out.join(", ")), k)
    }

    fn access(&mut self, e: &Expr, access: Access) -> (String, K) {
        let recv = match &e.kind {
            ExprKind::Field(r, _) => Some(&**r),
            _ => None,
        };
        let read = |raw: String, k: K| -> (String, K) {
            if k == K::Bool {
                (format!("({raw} != 0)"), k)
            } else {
                (raw, k)
            }
        };
        match access {
            Access::NodeProp(id) | Access::EdgeProp(id) => {
                let Some(recv) = recv else {
                    self.error(e.span, "expected a field access");
                    return ("0".into(), K::Int);
                };
                let want = if matches!(access, Access::NodeProp(_)) { K::Node } else { K::Edge };
                let idx = self.expr_as(recv, want);
                let raw = self.prop_at(id, strip_parens(&idx));
                read(raw, self.elem_kind(id))
            }
            Access::LoopVarProp(id) => {
                let Some(var) = self.filter_var.clone() else {
                    self.error(e.span, "property name outside a loop filter");
                    return ("0".into(), K::Int);
                };
                let raw = self.prop_at(id, &var);
                read(raw, self.elem_kind(id))
            }
            Access::AnyNode(id) => (format!("rt::any({})", self.prop_vec(id)), K::Bool),
            Access::EdgeSource | Access::EdgeDestination | Access::EdgeWeight => {
                let Some(recv) = recv else {
                    self.error(e.span, "expected a field access");
                    return ("0".into(), K::Int);
                };
                let r = self.expr_as(recv, K::Edge);
                match access {
                    Access::EdgeSource => (format!("{}.source", paren(&r)), K::Node),
                    Access::EdgeDestination => (format!("{}.destination", paren(&r)), K::Node),
                    _ => (format!("rt::weight({})", strip_parens(&r)), K::Int),
                }
            }
        }
    }

    fn binary(&mut self, e: &Expr, op: BinOp, a: &Expr, b: &Expr) -> (String, K) {
        let arith = match op {
            BinOp::Add => Some("add"),
            BinOp::Sub => Some("sub"),
            BinOp::Mul => Some("mul"),
            BinOp::Div => Some("div"),
            BinOp::Rem => Some("rem"),
            _ => None,
        };
        if let Some(f) = arith {
            let k = self.kind(e);
            let (x, y) = (self.expr_as(a, k), self.expr_as(b, k));
            return (
                format!("rt::{f}<{}>({}, {})", k.cpp(), strip_parens(&x), strip_parens(&y)),
                k,
            );
        }
        if op.is_logical() {
            let (x, y) = (self.expr_as(a, K::Bool), self.expr_as(b, K::Bool));
            return (format!("({x} {} {y})", op.symbol()), K::Bool);
        }
        let (ta, tb) = (self.c.symbols.type_of(a).clone(), self.c.symbols.type_of(b).clone());
        let domain = if ta == Type::Bool || tb == Type::Bool {
            K::Bool
        } else if ta.is_floating() || tb.is_floating() {
            K::Double
        } else if ta == Type::Long || tb == Type::Long {
            K::Long
        } else if ta == Type::Edge && tb == Type::Edge {
            K::Edge
        } else {
            K::Int
        };
        let (x, y) = (self.expr_as(a, domain), self.expr_as(b, domain));
        if domain == K::Edge {
            (
                format!("(rt::key({}) {} rt::key({}))", strip_parens(&x), op.symbol(), strip_parens(&y)),
                K::Bool,
            )
        } else {
            (format!("({x} {} {y})", op.symbol()), K::Bool)
        }
    }

    fn builtin(&mut self, e: &Expr, b: Builtin, recv: &Expr, args: &[Arg]) -> (String, K) {
        let g = self.ident_name(recv);
        let node = |me: &mut Self, i: usize| -> String {
            let v = me.expr_as(&args[i].value, K::Node);
            strip_parens(&v).to_string()
        };
        match b {
            Builtin::NumNodes => (format!("{g}.num_nodes()"), K::Int),
            Builtin::NumEdges => (format!("{g}.num_edges()"), K::Int),
            Builtin::CountOutNbrs => (format!("{g}.degree({})", node(self, 0)), K::Int),
            Builtin::CountInNbrs => (format!("{g}.in_degree({})", node(self, 0)), K::Int),
            Builtin::IsAnEdge => {
                let (x, y) = (node(self, 0), node(self, 1));
                (format!("{g}.is_an_edge({x}, {y})"), K::Bool)
            }
            Builtin::GetEdge => {
                if let Some(edge) = self.loop_edge(&args[0].value, &args[1].value) {
                    return (edge, K::Edge);
                }
                let (x, y) = (node(self, 0), node(self, 1));
                (format!("{g}.get_edge({x}, {y})"), K::Edge)
            }
            other => {
                self.error(e.span, format!("{other:?} cannot be used as a value"));
                ("0".into(), K::Int)
            }
        }
    }

    /// The edge traversed by an enclosing neighbor loop, when `get_edge(a, b)`
    /// names exactly it.
    fn loop_edge(&self, a: &Expr, b: &Expr) -> Option<String> {
        let (a, b) = (self.ident_binding(a)?, self.ident_binding(b)?);
        self.loops.iter().rev().find_map(|l| {
            let center = l.center?;
            let hit = if l.incoming {
                a == l.var && b == center
            } else {
                a == center && b == l.var
            };
            hit.then(|| l.edge.clone())
        })
    }
}

fn zero(k: K) -> &'static str {
    match k {
        K::Int | K::Node => "0",
        K::Long => "INT64_C(0)",
        K::Float => "0.0f",
        K::Double => "0.0",
        K::Bool => "false",
        K::Edge => "rt::Edge{}",
    }
}

fn int_literal(v: i64, k: K) -> String {
    match k {
        K::Int | K::Node if i32::try_from(v).is_ok() => v.to_string(),
        K::Int | K::Node => format!("rt::cvt<int32_t, int64_t>(INT64_C({v}))"),
        K::Long => format!("INT64_C({v})"),
        K::Double => format!("{v}.0"),
        K::Float => format!("static_cast<float>({v}.0)"),
        K::Bool => (v != 0).to_string(),
        K::Edge => "rt::Edge{}".into(),
    }
}

fn float_literal(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e']) {
        s
    } else {
        format!("{s}.0")
    }
}

fn convert(s: String, from: K, to: K) -> String {
    if from.cpp() == to.cpp() {
        s
    } else {
        format!("rt::cvt<{}, {}>({})", to.cpp(), from.cpp(), strip_parens(&s))
    }
}

/// Drops one pair of parentheses enclosing the whole expression.
fn strip_parens(s: &str) -> &str {
    if !(s.starts_with('(') && s.ends_with(')')) {
        return s;
    }
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 && i != s.len() - 1 {
                    return s;
                }
            }
            _ => {}
        }
    }
    &s[1..s.len() - 1]
}

/// Wraps `s` in parentheses when it has a top-level space.
fn paren(s: &str) -> String {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ' ' if depth == 0 => return format!("({s})"),
            _ => {}
        }
    }
    s.to_string()
}
