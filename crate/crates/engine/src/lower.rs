//! Translation of a checked program into the slot-resolved IR.

use std::collections::HashMap;

use graphdyn_dsl::ast::{
    AssignOp, BinOp, Block, Expr, ExprKind, Function, MinMaxKind, Stmt, StmtKind, UnOp,
};
use graphdyn_dsl::types::{Access, BindingId, BindingKind, Builtin, Callee};
use graphdyn_dsl::{Compiled, Span, SymbolTable, Type};

use crate::error::EngineError;
use crate::ir::*;
use crate::value::{ArithOp, CmpOp, Kind, Value};

type R<T> = Result<T, EngineError>;

#[derive(Debug, Clone, Copy)]
enum Loc {
    Var(Var, Kind),
    Prop(u32),
    Graph,
    Updates,
}

struct LoopInfo {
    var: BindingId,
    /// Immutable node binding the neighbor domain was taken from.
    center: Option<BindingId>,
    incoming: bool,
    edge_var: Var,
}

struct FnLower<'c> {
    table: &'c SymbolTable,
    fn_index: &'c HashMap<String, u32>,
    needs_reverse: &'c mut bool,
    writes: &'c mut HashMap<graphdyn_dsl::ast::StmtId, (String, Span)>,
    name: String,
    locs: HashMap<BindingId, Loc>,
    shared: Vec<Kind>,
    shared_names: Vec<Option<String>>,
    private: u32,
    props: Vec<PropSlot>,
    loops: Vec<LoopInfo>,
    /// Variable of the loop whose filter is being lowered.
    loops_filter_var: Option<Var>,
    region: Option<Vec<(u32, Kind)>>,
}

pub(crate) fn lower(c: &Compiled) -> R<Lowered> {
    let fn_index: HashMap<String, u32> = c
        .program
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.name.clone(), i as u32))
        .collect();
    let mut needs_reverse = false;
    let mut writes = HashMap::new();
    let mut funcs = Vec::new();
    for f in &c.program.functions {
        let l = FnLower {
            table: &c.symbols,
            fn_index: &fn_index,
            needs_reverse: &mut needs_reverse,
            writes: &mut writes,
            name: f.name.clone(),
            locs: HashMap::new(),
            shared: Vec::new(),
            shared_names: Vec::new(),
            private: 0,
            props: Vec::new(),
            loops: Vec::new(),
            loops_filter_var: None,
            region: None,
        };
        funcs.push(l.function(f)?);
    }
    Ok(Lowered {
        funcs,
        needs_reverse,
        flagged: c.access.flagged.keys().copied().collect(),
        writes,
    })
}

fn kind_of_type(t: &Type) -> Option<Kind> {
    match t {
        Type::Inf => Some(Kind::Int),
        t => Kind::from_type(t),
    }
}

fn arith_op(op: BinOp) -> Option<ArithOp> {
    Some(match op {
        BinOp::Add => ArithOp::Add,
        BinOp::Sub => ArithOp::Sub,
        BinOp::Mul => ArithOp::Mul,
        BinOp::Div => ArithOp::Div,
        BinOp::Rem => ArithOp::Rem,
        _ => return None,
    })
}

fn cmp_op(op: BinOp) -> Option<CmpOp> {
    Some(match op {
        BinOp::Lt => CmpOp::Lt,
        BinOp::Le => CmpOp::Le,
        BinOp::Gt => CmpOp::Gt,
        BinOp::Ge => CmpOp::Ge,
        BinOp::Eq => CmpOp::Eq,
        BinOp::Ne => CmpOp::Ne,
        _ => return None,
    })
}

impl<'c> FnLower<'c> {
    fn function(mut self, f: &Function) -> R<Func> {
        let mut params = Vec::new();
        let ids = self.table.params.get(&f.name).cloned().unwrap_or_default();
        for (p, id) in f.params.iter().zip(ids) {
            let loc = match self.loc(id, p.span)? {
                Loc::Var(v, k) => ParamLoc::Var(v, k),
                Loc::Prop(s) => ParamLoc::Prop(s),
                Loc::Graph => ParamLoc::Graph,
                Loc::Updates => ParamLoc::Updates,
            };
            params.push((p.name.clone(), loc));
        }
        let body = self.block(&f.body)?;
        Ok(Func {
            name: f.name.clone(),
            kind: f.kind,
            params,
            shared: self.shared,
            shared_names: self.shared_names,
            private: self.private,
            props: self.props,
            body,
        })
    }

    fn loc(&mut self, id: BindingId, span: Span) -> R<Loc> {
        if let Some(l) = self.locs.get(&id) {
            return Ok(*l);
        }
        let b = self.table.binding(id).clone();
        let loc = match &b.ty {
            Type::Graph => Loc::Graph,
            Type::Updates => Loc::Updates,
            Type::PropNode(t) | Type::PropEdge(t) => {
                let origin = match b.kind {
                    BindingKind::Companion(base) => match self.loc(base, span)? {
                        Loc::Prop(s) => PropOrigin::Companion(s),
                        _ => unreachable!("companion of a non-property"),
                    },
                    BindingKind::Param => PropOrigin::Param,
                    _ => PropOrigin::Local,
                };
                let kind = Kind::from_type(t)
                    .ok_or_else(|| EngineError::unsupported(span, format!("property of {t}")))?;
                self.props.push(PropSlot {
                    name: b.name.clone(),
                    kind,
                    edge: matches!(b.ty, Type::PropEdge(_)),
                    origin,
                });
                Loc::Prop(self.props.len() as u32 - 1)
            }
            t => {
                let kind = Kind::from_type(t).ok_or_else(|| {
                    EngineError::unsupported(span, format!("variables of type {t}"))
                })?;
                if b.private {
                    self.private += 1;
                    Loc::Var(Var::Private(self.private - 1), kind)
                } else {
                    self.shared.push(kind);
                    let named = matches!(b.kind, BindingKind::Local | BindingKind::Param)
                        && kind != Kind::Edge;
                    self.shared_names.push(named.then(|| b.name.clone()));
                    Loc::Var(Var::Shared(self.shared.len() as u32 - 1), kind)
                }
            }
        };
        self.locs.insert(id, loc);
        Ok(loc)
    }

    fn hidden_var(&mut self, private: bool) -> Var {
        if private {
            self.private += 1;
            Var::Private(self.private - 1)
        } else {
            self.shared.push(Kind::Edge);
            self.shared_names.push(None);
            Var::Shared(self.shared.len() as u32 - 1)
        }
    }

    fn binding_of(&self, e: &Expr) -> Option<BindingId> {
        self.table.names.get(&e.id).copied()
    }

    fn prop_of(&mut self, e: &Expr) -> R<u32> {
        let id = self
            .binding_of(e)
            .ok_or_else(|| EngineError::unsupported(e.span, "expected a property name"))?;
        match self.loc(id, e.span)? {
            Loc::Prop(s) => Ok(s),
            _ => Err(EngineError::unsupported(e.span, "expected a property name")),
        }
    }

    fn prop_slot(&mut self, id: BindingId, span: Span) -> R<u32> {
        match self.loc(id, span)? {
            Loc::Prop(s) => Ok(s),
            _ => Err(EngineError::unsupported(span, "expected a property")),
        }
    }

    // ---- expressions ----

    fn expr_as(&mut self, e: &Expr, want: Kind) -> R<Ex> {
        if matches!(e.kind, ExprKind::Inf) {
            return Ok(Ex::Const(want.inf()));
        }
        let (ex, have) = self.expr(e)?;
        Ok(if have == want {
            ex
        } else {
            Ex::Convert(have, want, Box::new(ex))
        })
    }

    fn kind(&self, e: &Expr) -> R<Kind> {
        kind_of_type(self.table.type_of(e)).ok_or_else(|| {
            EngineError::unsupported(
                e.span,
                format!("{} is not a value", self.table.type_of(e)),
            )
        })
    }

    fn expr(&mut self, e: &Expr) -> R<(Ex, Kind)> {
        if let Some(access) = self.table.accesses.get(&e.id).copied() {
            return self.access(e, access);
        }
        match &e.kind {
            ExprKind::Int(v) => Ok((Ex::Const(Value::Int(*v)), self.kind(e)?)),
            ExprKind::Float(v) => Ok((Ex::Const(Value::Float(*v)), Kind::Double)),
            ExprKind::Bool(b) => Ok((Ex::Const(Value::Bool(*b)), Kind::Bool)),
            ExprKind::Inf => Ok((Ex::Const(Kind::Int.inf()), Kind::Int)),
            ExprKind::Ident(name) => {
                let id = self.binding_of(e).ok_or_else(|| {
                    EngineError::unsupported(e.span, format!("unresolved name `{name}`"))
                })?;
                match self.loc(id, e.span)? {
                    Loc::Var(v, k) => Ok((Ex::Var(v), k)),
                    _ => Err(EngineError::unsupported(
                        e.span,
                        format!("`{name}` cannot be used as a value here"),
                    )),
                }
            }
            ExprKind::Unary(UnOp::Not, a) => {
                Ok((Ex::Not(Box::new(self.expr_as(a, Kind::Bool)?)), Kind::Bool))
            }
            ExprKind::Unary(UnOp::Neg, a) => {
                let k = self.kind(e)?;
                Ok((Ex::Neg(k, Box::new(self.expr_as(a, k)?)), k))
            }
            ExprKind::Binary(op, a, b) => self.binary(e, *op, a, b),
            ExprKind::Field(..) => Err(EngineError::unsupported(e.span, "unresolved field")),
            ExprKind::Method { args, .. } => {
                let Some(Callee::Builtin(b)) = self.table.callees.get(&e.id).cloned() else {
                    return Err(EngineError::unsupported(e.span, "unresolved method"));
                };
                self.builtin(e, b, args.iter().map(|a| &a.value).collect())
            }
            ExprKind::Call { args, .. } => match self.table.callees.get(&e.id).cloned() {
                Some(Callee::Builtin(Builtin::Abs)) => {
                    let k = self.kind(e)?;
                    Ok((Ex::Abs(k, Box::new(self.expr_as(&args[0].value, k)?)), k))
                }
                Some(Callee::User(name)) => {
                    let func = self.fn_index[&name];
                    let sig = self.table.signature(&name).expect("checked call").clone();
                    let mut out = Vec::new();
                    for (a, (_, pt)) in args.iter().zip(&sig.params) {
                        out.push(match pt {
                            Type::Graph | Type::Updates => Arg::Skip,
                            t if t.is_property() => Arg::Prop(self.prop_of(&a.value)?),
                            t => Arg::Value(self.expr_as(&a.value, Kind::from_type(t).unwrap())?),
                        });
                    }
                    let k = kind_of_type(&sig.ret).unwrap_or(Kind::Int);
                    Ok((
                        Ex::Call { func, args: out },
                        k,
                    ))
                }
                _ => Err(EngineError::unsupported(e.span, "unresolved call")),
            },
        }
    }

    fn access(&mut self, e: &Expr, access: Access) -> R<(Ex, Kind)> {
        let recv = match &e.kind {
            ExprKind::Field(r, _) => Some(&**r),
            _ => None,
        };
        match access {
            Access::NodeProp(id) | Access::EdgeProp(id) => {
                let prop = self.prop_slot(id, e.span)?;
                let kind = self.props[prop as usize].kind;
                let recv = recv.expect("field access");
                let ex = if matches!(access, Access::NodeProp(_)) {
                    Ex::NodeProp {
                        prop,
                        node: Box::new(self.expr_as(recv, Kind::Node)?),
                        span: e.span,
                    }
                } else {
                    Ex::EdgeProp {
                        prop,
                        edge: Box::new(self.expr_as(recv, Kind::Edge)?),
                        span: e.span,
                    }
                };
                Ok((ex, kind))
            }
            Access::LoopVarProp(id) => {
                let prop = self.prop_slot(id, e.span)?;
                let kind = self.props[prop as usize].kind;
                let var = self.loops_filter_var.ok_or_else(|| {
                    EngineError::unsupported(e.span, "property name outside a loop filter")
                })?;
                Ok((
                    Ex::NodeProp {
                        prop,
                        node: Box::new(Ex::Var(var)),
                        span: e.span,
                    },
                    kind,
                ))
            }
            Access::AnyNode(id) => Ok((Ex::AnyNode(self.prop_slot(id, e.span)?), Kind::Bool)),
            Access::EdgeSource | Access::EdgeDestination | Access::EdgeWeight => {
                let field = match access {
                    Access::EdgeSource => EdgeField::Source,
                    Access::EdgeDestination => EdgeField::Destination,
                    _ => EdgeField::Weight,
                };
                let k = if field == EdgeField::Weight {
                    Kind::Int
                } else {
                    Kind::Node
                };
                let r = self.expr_as(recv.expect("field access"), Kind::Edge)?;
                Ok((Ex::Field(field, Box::new(r), e.span), k))
            }
        }
    }

    fn binary(&mut self, e: &Expr, op: BinOp, a: &Expr, b: &Expr) -> R<(Ex, Kind)> {
        if let Some(aop) = arith_op(op) {
            let k = self.kind(e)?;
            let (x, y) = (self.expr_as(a, k)?, self.expr_as(b, k)?);
            return Ok((
                Ex::Arith {
                    op: aop,
                    kind: k,
                    a: Box::new(x),
                    b: Box::new(y),
                    span: e.span,
                },
                k,
            ));
        }
        if op == BinOp::And || op == BinOp::Or {
            let (x, y) = (self.expr_as(a, Kind::Bool)?, self.expr_as(b, Kind::Bool)?);
            let ex = if op == BinOp::And {
                Ex::And(Box::new(x), Box::new(y))
            } else {
                Ex::Or(Box::new(x), Box::new(y))
            };
            return Ok((ex, Kind::Bool));
        }
        let cop = cmp_op(op).expect("comparison");
        let (ta, tb) = (self.table.type_of(a).clone(), self.table.type_of(b).clone());
        let domain = if ta == Type::Bool || tb == Type::Bool {
            Kind::Bool
        } else if ta.is_floating() || tb.is_floating() {
            Kind::Double
        } else if ta == Type::Long || tb == Type::Long {
            Kind::Long
        } else if ta == Type::Edge && tb == Type::Edge {
            Kind::Edge
        } else {
            Kind::Int
        };
        let (x, y) = (self.expr_as(a, domain)?, self.expr_as(b, domain)?);
        Ok((Ex::Cmp(cop, Box::new(x), Box::new(y)), Kind::Bool))
    }

    fn builtin(&mut self, e: &Expr, b: Builtin, args: Vec<&Expr>) -> R<(Ex, Kind)> {
        let node = |l: &mut Self, i: usize| -> R<Box<Ex>> {
            Ok(Box::new(l.expr_as(args[i], Kind::Node)?))
        };
        Ok(match b {
            Builtin::NumNodes => (Ex::NumNodes, Kind::Int),
            Builtin::NumEdges => (Ex::NumEdges, Kind::Int),
            Builtin::CountOutNbrs => (Ex::Degree(node(self, 0)?, e.span), Kind::Int),
            Builtin::CountInNbrs => {
                *self.needs_reverse = true;
                (Ex::InDegree(node(self, 0)?, e.span), Kind::Int)
            }
            Builtin::IsAnEdge => (
                Ex::IsAnEdge(node(self, 0)?, node(self, 1)?, e.span),
                Kind::Bool,
            ),
            Builtin::GetEdge => {
                if let Some(v) = self.loop_edge(args[0], args[1]) {
                    return Ok((Ex::Var(v), Kind::Edge));
                }
                (
                    Ex::GetEdge(node(self, 0)?, node(self, 1)?, e.span),
                    Kind::Edge,
                )
            }
            other => {
                return Err(EngineError::unsupported(
                    e.span,
                    format!("{other:?} cannot be used as a value"),
                ))
            }
        })
    }

    /// The edge currently traversed by an enclosing neighbor loop, when
    /// `get_edge(a, b)` names exactly it.
    fn loop_edge(&self, a: &Expr, b: &Expr) -> Option<Var> {
        let (a, b) = (self.binding_of(a)?, self.binding_of(b)?);
        self.loops.iter().rev().find_map(|l| {
            let center = l.center?;
            let hit = if l.incoming {
                a == l.var && b == center
            } else {
                a == center && b == l.var
            };
            hit.then_some(l.edge_var)
        })
    }

    // ---- statements ----

    fn block(&mut self, b: &Block) -> R<Vec<St>> {
        let mut out = Vec::new();
        for s in &b.stmts {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn place(&mut self, target: &Expr) -> R<(Place, Kind)> {
        match &target.kind {
            ExprKind::Ident(_) => match self.binding_of(target).map(|id| self.loc(id, target.span)) {
                Some(Ok(Loc::Var(v, k))) => Ok((Place::Var(v), k)),
                Some(Err(e)) => Err(e),
                _ => Err(EngineError::unsupported(target.span, "not an assignable variable")),
            },
            ExprKind::Field(recv, _) => match self.table.accesses.get(&target.id).copied() {
                Some(Access::NodeProp(id)) => {
                    let prop = self.prop_slot(id, target.span)?;
                    let node = self.expr_as(recv, Kind::Node)?;
                    Ok((Place::Node { prop, node }, self.props[prop as usize].kind))
                }
                Some(Access::EdgeProp(id)) => {
                    let prop = self.prop_slot(id, target.span)?;
                    let edge = self.expr_as(recv, Kind::Edge)?;
                    Ok((Place::Edge { prop, edge }, self.props[prop as usize].kind))
                }
                _ => Err(EngineError::unsupported(target.span, "not an assignable field")),
            },
            _ => Err(EngineError::unsupported(target.span, "not an assignable location")),
        }
    }

    fn is_private_target(&self, target: &Expr) -> bool {
        self.binding_of(target)
            .is_some_and(|id| self.table.binding(id).private)
    }

    fn note_write(&mut self, s: &Stmt) {
        self.writes.insert(s.id, (self.name.clone(), s.span));
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<St>) -> R<()> {
        match &s.kind {
            StmtKind::Decl { init, .. } => {
                let id = self.table.decls[&s.id];
                match self.loc(id, s.span)? {
                    Loc::Prop(p) => out.push(St::DeclProp(p)),
                    Loc::Var(v, k) => {
                        let value = match init {
                            Some(e) => self.expr_as(e, k)?,
                            None => Ex::Const(k.zero()),
                        };
                        out.push(St::Set {
                            place: Place::Var(v),
                            value,
                            id: s.id,
                            span: s.span,
                        });
                    }
                    _ => return Err(EngineError::unsupported(s.span, "declaration")),
                }
            }
            StmtKind::Assign { target, op, value } => {
                if self.table.type_of(target).is_property() {
                    let dst = self.prop_of(target)?;
                    let src = self.prop_of(value)?;
                    out.push(St::CopyProp { dst, src });
                    return Ok(());
                }
                self.note_write(s);
                let (place, kind) = self.place(target)?;
                let value = self.expr_as(value, kind)?;
                let aop = match op {
                    AssignOp::Set => {
                        out.push(St::Set {
                            place,
                            value,
                            id: s.id,
                            span: s.span,
                        });
                        return Ok(());
                    }
                    AssignOp::Add | AssignOp::Incr => ArithOp::Add,
                    AssignOp::Sub => ArithOp::Sub,
                };
                let private_target = self.is_private_target(target);
                if let (Place::Var(Var::Shared(slot)), Some(reds)) = (&place, &mut self.region) {
                    if !private_target {
                        let acc = match reds.iter().position(|(x, _)| x == slot) {
                            Some(i) => i,
                            None => {
                                reds.push((*slot, kind));
                                reds.len() - 1
                            }
                        };
                        out.push(St::Accumulate {
                            acc: acc as u32,
                            kind,
                            op: aop,
                            value,
                            id: s.id,
                            span: s.span,
                        });
                        return Ok(());
                    }
                }
                out.push(St::Update {
                    place,
                    kind,
                    op: aop,
                    value,
                    id: s.id,
                    span: s.span,
                });
            }
            StmtKind::MinMax {
                kind: mm,
                targets,
                values,
            } => {
                self.note_write(s);
                let mut pairs = Vec::new();
                for (t, v) in targets.iter().zip(values) {
                    let (p, k) = self.place(t)?;
                    let ex = self.expr_as(v, k)?;
                    pairs.push((p, k, ex));
                }
                let (guard, kind, value) = pairs.remove(0);
                out.push(St::MinMax {
                    max: *mm == MinMaxKind::Max,
                    kind,
                    guard,
                    value,
                    rest: pairs,
                    id: s.id,
                    span: s.span,
                });
            }
            StmtKind::If {
                cond,
                then,
                otherwise,
            } => {
                let c = self.expr_as(cond, Kind::Bool)?;
                let t = self.block(then)?;
                let o = match otherwise {
                    Some(b) => self.block(b)?,
                    None => Vec::new(),
                };
                out.push(St::If(c, t, o));
            }
            StmtKind::While { cond, body } => {
                let c = self.expr_as(cond, Kind::Bool)?;
                let b = self.block(body)?;
                out.push(St::While(c, b));
            }
            StmtKind::For { iter, body, .. } | StmtKind::ForAll { iter, body, .. } => {
                let parallel = matches!(s.kind, StmtKind::ForAll { parallel: true, .. });
                let lp = self.lower_loop(s, &iter.source, iter.filter.as_ref(), body, parallel, None)?;
                out.push(St::Loop(Box::new(lp)));
            }
            StmtKind::OnAdd { source, body, .. } | StmtKind::OnDelete { source, body, .. } => {
                let sel = if matches!(s.kind, StmtKind::OnAdd { .. }) {
                    Selector::Adds
                } else {
                    Selector::Deletes
                };
                let lp = self.lower_loop(s, source, None, body, true, Some(sel))?;
                out.push(St::Loop(Box::new(lp)));
            }
            StmtKind::FixedPoint { cond, body, .. } => {
                let id = self.table.stmt_bindings[&s.id];
                let Loc::Var(var, _) = self.loc(id, s.span)? else {
                    unreachable!("fixedPoint variable is a scalar")
                };
                let c = self.expr_as(cond, Kind::Bool)?;
                let b = self.block(body)?;
                let mut swaps = Vec::new();
                for comp in self.companions_written(body) {
                    let BindingKind::Companion(base) = self.table.binding(comp).kind else {
                        continue;
                    };
                    let pair = (self.prop_slot(base, s.span)?, self.prop_slot(comp, s.span)?);
                    if !swaps.contains(&pair) {
                        swaps.push(pair);
                    }
                }
                out.push(St::FixedPoint {
                    var,
                    cond: c,
                    body: b,
                    swaps,
                    span: s.span,
                });
            }
            StmtKind::Batch { size, body, .. } => {
                let size = self.expr_as(size, Kind::Long)?;
                let b = self.block(body)?;
                out.push(St::Batch {
                    size,
                    body: b,
                    span: s.span,
                });
            }
            StmtKind::Expr(e) => out.push(self.effect(e)?),
            StmtKind::Return(e) => {
                let ex = match e {
                    Some(e) => {
                        let ret = self
                            .table
                            .signature(&self.name)
                            .and_then(|sig| kind_of_type(&sig.ret));
                        match ret {
                            Some(k) => Some(self.expr_as(e, k)?),
                            None => Some(self.expr(e)?.0),
                        }
                    }
                    None => None,
                };
                out.push(St::Return(ex));
            }
            StmtKind::Block(b) => out.extend(self.block(b)?),
        }
        Ok(())
    }

    /// Statement-level builtins and calls.
    fn effect(&mut self, e: &Expr) -> R<St> {
        let callee = self.table.callees.get(&e.id).cloned();
        let ExprKind::Method { args, .. } = &e.kind else {
            return Ok(St::Eval(self.expr(e)?.0));
        };
        Ok(match callee {
            Some(Callee::Builtin(Builtin::UpdateCsrAdd)) => St::UpdateCsr {
                add: true,
                span: e.span,
            },
            Some(Callee::Builtin(Builtin::UpdateCsrDel)) => St::UpdateCsr {
                add: false,
                span: e.span,
            },
            Some(Callee::Builtin(Builtin::PropagateNodeFlags)) => {
                *self.needs_reverse = true;
                St::Propagate {
                    prop: self.prop_of(&args[0].value)?,
                    span: e.span,
                }
            }
            Some(Callee::Builtin(Builtin::AttachNodeProperty | Builtin::AttachEdgeProperty)) => {
                let ids = self.table.attach_targets.get(&e.id).cloned().unwrap_or_default();
                let mut targets = Vec::new();
                for (id, a) in ids.into_iter().zip(args) {
                    let prop = self.prop_slot(id, a.value.span)?;
                    let k = self.props[prop as usize].kind;
                    targets.push((prop, self.expr_as(&a.value, k)?));
                }
                St::Attach(targets)
            }
            _ => St::Eval(self.expr(e)?.0),
        })
    }

    fn companions_written(&self, body: &Block) -> Vec<BindingId> {
        let mut out = Vec::new();
        let mut note = |t: &Expr| {
            if let Some(Access::NodeProp(id) | Access::EdgeProp(id)) = self.table.accesses.get(&t.id) {
                if matches!(self.table.binding(*id).kind, BindingKind::Companion(_)) {
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

    fn lower_loop(
        &mut self,
        s: &Stmt,
        source: &Expr,
        filter: Option<&Expr>,
        body: &Block,
        parallel: bool,
        on_update: Option<Selector>,
    ) -> R<Loop> {
        let var_id = self.table.stmt_bindings[&s.id];
        let Loc::Var(var, _) = self.loc(var_id, s.span)? else {
            unreachable!("loop variable is a scalar")
        };
        let private = matches!(var, Var::Private(_));
        let callee = self.table.callees.get(&source.id).cloned();
        let mut center = None;
        let mut incoming = false;
        let domain = match (callee, &source.kind) {
            (Some(Callee::Builtin(Builtin::Nodes)), _) => Domain::Nodes,
            (Some(Callee::Builtin(b @ (Builtin::Neighbors | Builtin::NodesTo))), ExprKind::Method { args, .. }) => {
                let arg = &args[0].value;
                center = self
                    .binding_of(arg)
                    .filter(|id| !self.table.binding(*id).mutable);
                let x = self.expr_as(arg, Kind::Node)?;
                if b == Builtin::NodesTo {
                    *self.needs_reverse = true;
                    incoming = true;
                    Domain::In(x)
                } else {
                    Domain::Out(x)
                }
            }
            (Some(Callee::Builtin(Builtin::CurrentBatch)), ExprKind::Method { args, .. }) => {
                Domain::Updates(match args.first().map(|a| &a.value.kind) {
                    Some(ExprKind::Int(0)) => Selector::Deletes,
                    Some(ExprKind::Int(1)) => Selector::Adds,
                    _ => Selector::All,
                })
            }
            (_, ExprKind::Ident(_)) if *self.table.type_of(source) == Type::Updates => {
                Domain::Updates(Selector::All)
            }
            _ => return Err(EngineError::unsupported(source.span, "unsupported loop domain")),
        };
        let domain = match (domain, on_update) {
            (Domain::Updates(a), Some(b)) => Domain::Updates(a.and(b)),
            (d, _) => d,
        };
        let edge_var = matches!(domain, Domain::Out(_) | Domain::In(_)).then(|| self.hidden_var(private));
        let saved_filter = self.loops_filter_var.replace(var);
        let filter = match filter {
            Some(f) => Some(self.expr_as(f, Kind::Bool)?),
            None => None,
        };
        self.loops_filter_var = saved_filter;
        let opens = parallel && self.region.is_none();
        if opens {
            self.region = Some(Vec::new());
        }
        if let Some(ev) = edge_var {
            self.loops.push(LoopInfo {
                var: var_id,
                center,
                incoming,
                edge_var: ev,
            });
        }
        let body = self.block(body);
        if edge_var.is_some() {
            self.loops.pop();
        }
        let region = if opens {
            self.region.take().map(|reductions| Region { reductions })
        } else {
            None
        };
        Ok(Loop {
            var,
            domain,
            filter,
            body: body?,
            edge_var,
            region,
            on_update: on_update.is_some(),
            span: s.span,
        })
    }
}
