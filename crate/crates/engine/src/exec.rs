//! The interpreter.
//!
//! Sequential code runs on the calling thread with the graph behind a lock.
//! A parallel loop pins the graph for reading, cuts its iterations into
//! fixed chunks and runs the chunks on the worker pool. Because chunk
//! boundaries do not depend on the number of workers and reductions are
//! folded in chunk order, results are the same for any worker count.

use std::collections::{HashMap, HashSet};
use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, Weak};
use std::time::{Duration, Instant};

use graphdyn_core::{EdgeRef, NodeId, UpdateRecord, UpdateStream};
use graphdyn_dsl::ast::StmtId;
use graphdyn_dsl::Span;
use parking_lot::{Mutex, RwLock};
use rayon::prelude::*;

use crate::error::EngineError;
use crate::ir::*;
use crate::propagate::propagate_table;
use crate::store::PropertyTable;
use crate::topology::Topology;
use crate::value::{arith, compare, convert, negate, ArithOp, CmpOp, EdgeVal, Kind, Value};
use crate::{BatchStats, FixedPointStats, RunStats};

type R<T> = Result<T, EngineError>;

/// Iterations per chunk of a parallel loop.
const CHUNK: usize = 128;
const STRIPES: usize = 64;

pub(crate) struct Cx<'a, G> {
    /// The graph, when a parallel loop holds it for reading.
    pinned: Option<&'a G>,
    caller: Option<NodeId>,
    /// Parallel loop instance and iteration, for contention tracking.
    tag: Option<(u64, u64)>,
    /// The current frame was created inside a parallel iteration.
    ephemeral: bool,
}

impl<G> Clone for Cx<'_, G> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<G> Copy for Cx<'_, G> {}

impl<G> Cx<'_, G> {
    pub(crate) fn top() -> Self {
        Cx {
            pinned: None,
            caller: None,
            tag: None,
            ephemeral: false,
        }
    }
}

enum Cell {
    Bits(AtomicU64),
    Edge(Mutex<EdgeVal>),
}

pub(crate) struct Frame<'p> {
    pub func: &'p Func,
    cells: Vec<Cell>,
    pub props: Vec<OnceLock<Arc<PropertyTable>>>,
}

impl<'p> Frame<'p> {
    pub fn new(func: &'p Func) -> Self {
        Frame {
            func,
            cells: func
                .shared
                .iter()
                .map(|k| match k {
                    Kind::Edge => Cell::Edge(Mutex::new(EdgeVal::missing(0, 0))),
                    k => Cell::Bits(AtomicU64::new(k.zero().to_bits())),
                })
                .collect(),
            props: func.props.iter().map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn get(&self, i: u32) -> Value {
        match &self.cells[i as usize] {
            Cell::Bits(a) => Value::from_bits(
                self.func.shared[i as usize],
                a.load(Ordering::Relaxed),
            ),
            Cell::Edge(m) => Value::Edge(*m.lock()),
        }
    }

    pub fn set(&self, i: u32, v: Value) {
        match &self.cells[i as usize] {
            Cell::Bits(a) => a.store(v.to_bits(), Ordering::Relaxed),
            Cell::Edge(m) => {
                if let Value::Edge(e) = v {
                    *m.lock() = e;
                }
            }
        }
    }

    fn key(&self, i: u32) -> usize {
        &self.cells[i as usize] as *const Cell as usize
    }
}

pub(crate) struct Local {
    vals: Vec<Value>,
    accs: Vec<Value>,
    acc_slots: Vec<u32>,
}

impl Local {
    pub fn new(private: u32) -> Self {
        Local {
            vals: vec![Value::Unit; private as usize],
            accs: Vec::new(),
            acc_slots: Vec::new(),
        }
    }

    fn for_region(private: u32, region: &Region) -> Self {
        Local {
            vals: vec![Value::Unit; private as usize],
            accs: region.reductions.iter().map(|(_, k)| k.zero()).collect(),
            acc_slots: region.reductions.iter().map(|(s, _)| *s).collect(),
        }
    }
}

pub(crate) enum Flow {
    Next,
    Return(Value),
}

enum Target<'f> {
    Private(usize),
    Shared(u32),
    Prop(&'f PropertyTable, usize),
}

#[derive(Default)]
struct BatchTimers {
    preprocess: Duration,
    update: Duration,
    deletes_applied: usize,
    delete_misses: usize,
    adds_applied: usize,
}

#[derive(Default)]
struct Tracker {
    last: Mutex<HashMap<(usize, usize), (u64, u64, StmtId)>>,
    contended: Mutex<HashSet<StmtId>>,
}

impl Tracker {
    fn record(&self, key: (usize, usize), tag: (u64, u64), stmt: StmtId) {
        let prev = self.last.lock().insert(key, (tag.0, tag.1, stmt));
        if let Some((region, iter, other)) = prev {
            if region == tag.0 && iter != tag.1 {
                let mut c = self.contended.lock();
                c.insert(stmt);
                c.insert(other);
            }
        }
    }
}

enum Items {
    Nodes(usize),
    Edges {
        center: NodeId,
        incoming: bool,
        edges: Vec<EdgeVal>,
    },
    Records(Vec<UpdateRecord>),
}

impl Items {
    fn len(&self) -> usize {
        match self {
            Items::Nodes(n) => *n,
            Items::Edges { edges, .. } => edges.len(),
            Items::Records(r) => r.len(),
        }
    }

    /// Loop variable, traversed edge and requesting node of iteration `k`.
    fn get(&self, k: usize) -> (Value, Option<Value>, NodeId) {
        match self {
            Items::Nodes(_) => (Value::Int(k as i64), None, k as NodeId),
            Items::Edges {
                center,
                incoming,
                edges,
            } => {
                let e = edges[k];
                let other = if *incoming { e.source } else { e.destination };
                (Value::Int(other as i64), Some(Value::Edge(e)), *center)
            }
            Items::Records(r) => {
                let u = r[k];
                let e = EdgeVal {
                    source: u.source,
                    destination: u.destination,
                    weight: u.weight,
                    slot: EdgeVal::LOOKUP,
                };
                (Value::Edge(e), None, u.source)
            }
        }
    }
}

fn edge_val(e: EdgeRef) -> EdgeVal {
    EdgeVal {
        source: e.source,
        destination: e.target,
        weight: e.weight,
        slot: if e.id == usize::MAX {
            EdgeVal::LOOKUP
        } else {
            e.id
        },
    }
}

pub(crate) struct Machine<'p, G> {
    prog: &'p Lowered,
    graph: RwLock<G>,
    n: usize,
    updates: Option<UpdateStream>,
    window: RwLock<Option<Range<usize>>>,
    sequential: bool,
    cap: u64,
    edge_tables: Mutex<Vec<Weak<PropertyTable>>>,
    timers: Mutex<BatchTimers>,
    stats: Mutex<RunStats>,
    tracker: Option<Tracker>,
    regions: AtomicU64,
    stripes: Vec<Mutex<()>>,
    started: Instant,
}

impl<'p, G: Topology> Machine<'p, G> {
    pub fn new(
        prog: &'p Lowered,
        graph: G,
        updates: Option<UpdateStream>,
        sequential: bool,
        cap: u64,
        track: bool,
    ) -> Self {
        let n = graph.node_count();
        Machine {
            prog,
            graph: RwLock::new(graph),
            n,
            updates,
            window: RwLock::new(None),
            sequential,
            cap,
            edge_tables: Mutex::new(Vec::new()),
            timers: Mutex::new(BatchTimers::default()),
            stats: Mutex::new(RunStats::default()),
            tracker: track.then(Tracker::default),
            regions: AtomicU64::new(0),
            stripes: (0..STRIPES).map(|_| Mutex::new(())).collect(),
            started: Instant::now(),
        }
    }

    pub fn into_parts(self) -> (G, RunStats) {
        let mut stats = self.stats.into_inner();
        stats.total = self.started.elapsed();
        (self.graph.into_inner(), stats)
    }

    /// Statements whose writes collided but were not flagged by the access
    /// analysis, and the number of contended statements.
    pub fn contention(&self) -> (Vec<StmtId>, usize) {
        let Some(t) = &self.tracker else {
            return (Vec::new(), 0);
        };
        let c = t.contended.lock();
        let mut bad: Vec<StmtId> = c
            .iter()
            .filter(|s| !self.prog.flagged.contains(s))
            .copied()
            .collect();
        bad.sort();
        (bad, c.len())
    }

    fn graph<T>(&self, cx: &Cx<'_, G>, f: impl FnOnce(&G) -> T) -> T {
        match cx.pinned {
            Some(g) => f(g),
            None => f(&self.graph.read()),
        }
    }

    pub fn new_table(&self, cx: &Cx<'_, G>, kind: Kind, edge: bool) -> Arc<PropertyTable> {
        let len = if edge {
            self.graph(cx, |g| g.edge_slot_count())
        } else {
            self.n
        };
        let t = Arc::new(PropertyTable::new(kind, edge, len));
        if edge {
            let mut reg = self.edge_tables.lock();
            reg.retain(|w| w.strong_count() > 0);
            reg.push(Arc::downgrade(&t));
        }
        t
    }

    fn live_edge_tables(&self) -> Vec<Arc<PropertyTable>> {
        self.edge_tables
            .lock()
            .iter()
            .filter_map(Weak::upgrade)
            .collect()
    }

    pub fn table<'f>(&self, cx: &Cx<'_, G>, fr: &'f Frame<'_>, slot: u32) -> &'f Arc<PropertyTable> {
        let p = &fr.func.props[slot as usize];
        fr.props[slot as usize].get_or_init(|| match p.origin {
            PropOrigin::Companion(base) => {
                let b = self.table(cx, fr, base);
                b.companion
                    .get_or_init(|| self.new_table(cx, b.kind(), b.is_edge()))
                    .clone()
            }
            _ => self.new_table(cx, p.kind, p.edge),
        })
    }

    fn touch(&self, cx: &Cx<'_, G>, node: NodeId, write: bool) {
        if let Some(c) = cx.caller {
            self.graph(cx, |g| g.touch(c, node, write));
        }
    }

    fn node(&self, v: Value, span: Span) -> R<usize> {
        let i = v.as_i64();
        if i < 0 || i as usize >= self.n {
            return Err(EngineError::runtime(
                span,
                format!("node {i} is out of range for {} nodes", self.n),
            ));
        }
        Ok(i as usize)
    }

    fn edge_slot(&self, cx: &Cx<'_, G>, e: EdgeVal, span: Span) -> R<usize> {
        match e.slot {
            EdgeVal::MISSING => Err(EngineError::runtime(
                span,
                format!("there is no edge {} -> {}", e.source, e.destination),
            )),
            EdgeVal::LOOKUP => self
                .graph(cx, |g| g.find_edge(cx.caller, e.source, e.destination))
                .map(|r| r.id)
                .ok_or_else(|| {
                    EngineError::runtime(
                        span,
                        format!("there is no edge {} -> {}", e.source, e.destination),
                    )
                }),
            s => Ok(s),
        }
    }

    fn edge_of(&self, v: Value, span: Span) -> R<EdgeVal> {
        v.as_edge()
            .ok_or_else(|| EngineError::runtime(span, "expected an edge"))
    }

    // ---- expressions ----

    pub fn eval(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, l: &Local, e: &Ex) -> R<Value> {
        Ok(match e {
            Ex::Const(v) => *v,
            Ex::Var(Var::Private(i)) => l.vals[*i as usize],
            Ex::Var(Var::Shared(i)) => fr.get(*i),
            Ex::NodeProp { prop, node, span } => {
                let i = self.node(self.eval(cx, fr, l, node)?, *span)?;
                self.touch(cx, i as NodeId, false);
                self.table(cx, fr, *prop)
                    .get(i)
                    .ok_or_else(|| EngineError::runtime(*span, "property index out of range"))?
            }
            Ex::EdgeProp { prop, edge, span } => {
                let ev = self.edge_of(self.eval(cx, fr, l, edge)?, *span)?;
                let s = self.edge_slot(cx, ev, *span)?;
                self.touch(cx, ev.source, false);
                self.table(cx, fr, *prop).get(s).ok_or_else(|| {
                    EngineError::runtime(*span, format!("edge slot {s} is out of range"))
                })?
            }
            Ex::AnyNode(p) => Value::Bool(self.table(cx, fr, *p).any_true()),
            Ex::Field(f, x, span) => {
                let ev = self.edge_of(self.eval(cx, fr, l, x)?, *span)?;
                match f {
                    EdgeField::Source => Value::Int(ev.source as i64),
                    EdgeField::Destination => Value::Int(ev.destination as i64),
                    EdgeField::Weight => {
                        if !ev.exists() {
                            return Err(EngineError::runtime(
                                *span,
                                format!(
                                    "weight of a missing edge {} -> {}",
                                    ev.source, ev.destination
                                ),
                            ));
                        }
                        Value::Int(ev.weight as i64)
                    }
                }
            }
            Ex::Arith {
                op,
                kind,
                a,
                b,
                span,
            } => {
                let x = self.eval(cx, fr, l, a)?;
                let y = self.eval(cx, fr, l, b)?;
                arith(*op, *kind, x, y).map_err(|err| EngineError::runtime(*span, err.0))?
            }
            Ex::Neg(k, a) => negate(*k, self.eval(cx, fr, l, a)?),
            Ex::Abs(k, a) => crate::value::abs(*k, self.eval(cx, fr, l, a)?),
            Ex::Cmp(op, a, b) => {
                let x = self.eval(cx, fr, l, a)?;
                let y = self.eval(cx, fr, l, b)?;
                Value::Bool(compare(*op, x, y))
            }
            Ex::And(a, b) => {
                Value::Bool(self.eval(cx, fr, l, a)?.as_bool() && self.eval(cx, fr, l, b)?.as_bool())
            }
            Ex::Or(a, b) => {
                Value::Bool(self.eval(cx, fr, l, a)?.as_bool() || self.eval(cx, fr, l, b)?.as_bool())
            }
            Ex::Not(a) => Value::Bool(!self.eval(cx, fr, l, a)?.as_bool()),
            Ex::Convert(from, to, a) => convert(self.eval(cx, fr, l, a)?, *from, *to),
            Ex::Call { func, args, .. } => self.call(cx, fr, l, *func, args)?,
            Ex::NumNodes => Value::Int(self.n as i64),
            Ex::NumEdges => {
                let m = self.graph(cx, |g| g.live_edge_count());
                Value::Int(m.min(i32::MAX as usize) as i64)
            }
            Ex::GetEdge(u, v, span) => {
                let u = self.node(self.eval(cx, fr, l, u)?, *span)? as NodeId;
                let v = self.node(self.eval(cx, fr, l, v)?, *span)? as NodeId;
                let found = self.graph(cx, |g| g.find_edge(cx.caller, u, v));
                Value::Edge(found.map_or(EdgeVal::missing(u, v), edge_val))
            }
            Ex::IsAnEdge(u, v, span) => {
                let u = self.node(self.eval(cx, fr, l, u)?, *span)? as NodeId;
                let v = self.node(self.eval(cx, fr, l, v)?, *span)? as NodeId;
                Value::Bool(self.graph(cx, |g| g.find_edge(cx.caller, u, v)).is_some())
            }
            Ex::Degree(v, span) => {
                let v = self.node(self.eval(cx, fr, l, v)?, *span)? as NodeId;
                Value::Int(self.graph(cx, |g| g.degree(cx.caller, v)) as i64)
            }
            Ex::InDegree(v, span) => {
                let v = self.node(self.eval(cx, fr, l, v)?, *span)? as NodeId;
                let d = self
                    .graph(cx, |g| g.in_degree(cx.caller, v))
                    .map_err(|source| EngineError::Graph { span: *span, source })?;
                Value::Int(d as i64)
            }
        })
    }

    pub fn call(
        &self,
        cx: &Cx<'_, G>,
        fr: &Frame<'_>,
        l: &Local,
        func: u32,
        args: &[Arg],
    ) -> R<Value> {
        let callee = &self.prog.funcs[func as usize];
        let frame = Frame::new(callee);
        for ((_, p), a) in callee.params.iter().zip(args) {
            match (p, a) {
                (ParamLoc::Var(Var::Shared(i), _), Arg::Value(ex)) => {
                    frame.set(*i, self.eval(cx, fr, l, ex)?)
                }
                (ParamLoc::Prop(s), Arg::Prop(src)) => {
                    let t = self.table(cx, fr, *src).clone();
                    let _ = frame.props[*s as usize].set(t);
                }
                _ => {}
            }
        }
        let inner = Cx {
            ephemeral: cx.ephemeral || cx.tag.is_some(),
            ..*cx
        };
        let mut local = Local::new(callee.private);
        match self.exec(&inner, &frame, &mut local, &callee.body)? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(Value::Unit),
        }
    }

    // ---- writes ----

    fn resolve<'f>(
        &self,
        cx: &Cx<'_, G>,
        fr: &'f Frame<'_>,
        l: &Local,
        place: &Place,
        span: Span,
    ) -> R<Target<'f>> {
        Ok(match place {
            Place::Var(Var::Private(i)) => Target::Private(*i as usize),
            Place::Var(Var::Shared(i)) => Target::Shared(*i),
            Place::Node { prop, node } => {
                let i = self.node(self.eval(cx, fr, l, node)?, span)?;
                self.touch(cx, i as NodeId, true);
                Target::Prop(self.table(cx, fr, *prop), i)
            }
            Place::Edge { prop, edge } => {
                let ev = self.edge_of(self.eval(cx, fr, l, edge)?, span)?;
                let s = self.edge_slot(cx, ev, span)?;
                self.touch(cx, ev.source, true);
                let t = self.table(cx, fr, *prop);
                if s >= t.len() {
                    return Err(EngineError::runtime(span, format!("edge slot {s} is out of range")));
                }
                Target::Prop(t, s)
            }
        })
    }

    fn key(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, t: &Target<'_>) -> Option<(usize, usize)> {
        match t {
            Target::Private(_) => None,
            Target::Shared(i) => (!cx.ephemeral).then(|| (fr.key(*i), 0)),
            Target::Prop(tab, i) => Some((*tab as *const PropertyTable as usize, *i + 1)),
        }
    }

    fn track(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, t: &Target<'_>, stmt: StmtId) {
        if let (Some(tr), Some(tag)) = (&self.tracker, cx.tag) {
            if let Some(k) = self.key(cx, fr, t) {
                tr.record(k, tag, stmt);
            }
        }
    }

    fn write(&self, fr: &Frame<'_>, l: &mut Local, t: &Target<'_>, v: Value) {
        match t {
            Target::Private(i) => l.vals[*i] = v,
            Target::Shared(i) => fr.set(*i, v),
            Target::Prop(tab, i) => {
                tab.set(*i, v);
            }
        }
    }

    /// Atomic read-modify-write: `f(current)` yields the replacement, or
    /// `None` to leave the cell alone. Returns whether a write happened.
    fn rmw(
        &self,
        fr: &Frame<'_>,
        l: &mut Local,
        t: &Target<'_>,
        kind: Kind,
        f: impl Fn(Value) -> R<Option<Value>>,
    ) -> R<bool> {
        let cas = |a: &AtomicU64| -> R<bool> {
            let mut cur = a.load(Ordering::Relaxed);
            loop {
                let Some(new) = f(Value::from_bits(kind, cur))? else {
                    return Ok(false);
                };
                match a.compare_exchange_weak(cur, new.to_bits(), Ordering::AcqRel, Ordering::Relaxed) {
                    Ok(_) => return Ok(true),
                    Err(seen) => cur = seen,
                }
            }
        };
        match t {
            Target::Private(i) => match f(l.vals[*i])? {
                Some(v) => {
                    l.vals[*i] = v;
                    Ok(true)
                }
                None => Ok(false),
            },
            Target::Shared(i) => match &fr.cells[*i as usize] {
                Cell::Bits(a) => cas(a),
                Cell::Edge(_) => Ok(false),
            },
            Target::Prop(tab, i) => tab.with_cell(*i, cas).unwrap_or(Ok(false)),
        }
    }

    fn stripe(&self, key: (usize, usize)) -> &Mutex<()> {
        let h = key.0.wrapping_mul(31).wrapping_add(key.1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        &self.stripes[(h >> 58) as usize % STRIPES]
    }

    // ---- statements ----

    pub fn exec(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, l: &mut Local, body: &[St]) -> R<Flow> {
        for s in body {
            if let Flow::Return(v) = self.step(cx, fr, l, s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn step(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, l: &mut Local, s: &St) -> R<Flow> {
        match s {
            St::Set {
                place,
                value,
                id,
                span,
                ..
            } => {
                let v = self.eval(cx, fr, l, value)?;
                let t = self.resolve(cx, fr, l, place, *span)?;
                self.track(cx, fr, &t, *id);
                self.write(fr, l, &t, v);
            }
            St::Update {
                place,
                kind,
                op,
                value,
                id,
                span,
            } => {
                let v = self.eval(cx, fr, l, value)?;
                let t = self.resolve(cx, fr, l, place, *span)?;
                self.track(cx, fr, &t, *id);
                self.rmw(fr, l, &t, *kind, |cur| {
                    arith(*op, *kind, cur, v)
                        .map(Some)
                        .map_err(|e| EngineError::runtime(*span, e.0))
                })?;
            }
            St::Accumulate {
                acc,
                kind,
                op,
                value,
                id,
                span,
            } => {
                let v = self.eval(cx, fr, l, value)?;
                let i = *acc as usize;
                if i < l.accs.len() {
                    l.accs[i] = arith(*op, *kind, l.accs[i], v)
                        .map_err(|e| EngineError::runtime(*span, e.0))?;
                    self.track(cx, fr, &Target::Shared(l.acc_slots[i]), *id);
                } else {
                    return Err(EngineError::runtime(*span, "reduction outside its parallel loop"));
                }
            }
            St::MinMax {
                max,
                kind,
                guard,
                value,
                rest,
                id,
                span,
            } => {
                let v = self.eval(cx, fr, l, value)?;
                let op = if *max { CmpOp::Gt } else { CmpOp::Lt };
                let better = |cur: Value| Ok(compare(op, v, cur).then_some(v));
                let t = self.resolve(cx, fr, l, guard, *span)?;
                self.track(cx, fr, &t, *id);
                if rest.is_empty() {
                    self.rmw(fr, l, &t, *kind, better)?;
                    return Ok(Flow::Next);
                }
                let mut others = Vec::with_capacity(rest.len());
                for (p, _, ex) in rest {
                    others.push((p, self.eval(cx, fr, l, ex)?));
                }
                let lock = self.key(cx, fr, &t).map(|k| self.stripe(k).lock());
                if self.rmw(fr, l, &t, *kind, better)? {
                    for (p, val) in others {
                        let rt = self.resolve(cx, fr, l, p, *span)?;
                        self.track(cx, fr, &rt, *id);
                        self.write(fr, l, &rt, val);
                    }
                }
                drop(lock);
            }
            St::If(c, t, o) => {
                let branch = if self.eval(cx, fr, l, c)?.as_bool() { t } else { o };
                return self.exec(cx, fr, l, branch);
            }
            St::While(c, body) => {
                while self.eval(cx, fr, l, c)?.as_bool() {
                    if let Flow::Return(v) = self.exec(cx, fr, l, body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            St::Loop(lp) => return self.run_loop(cx, fr, l, lp),
            St::FixedPoint {
                var,
                cond,
                body,
                swaps,
                span,
            } => return self.fixed_point(cx, fr, l, *var, cond, body, swaps, *span),
            St::Batch { size, body, span } => return self.batch(cx, fr, l, size, body, *span),
            St::DeclProp(p) => {
                let slot = &fr.props[*p as usize];
                match slot.get() {
                    Some(t) => t.fill(t.kind().zero()),
                    None => {
                        self.table(cx, fr, *p);
                    }
                }
            }
            St::Attach(targets) => {
                for (p, ex) in targets {
                    let v = self.eval(cx, fr, l, ex)?;
                    self.table(cx, fr, *p).fill(v);
                }
            }
            St::CopyProp { dst, src } => {
                let s = self.table(cx, fr, *src).clone();
                self.table(cx, fr, *dst).copy_from(&s);
            }
            St::UpdateCsr { add, span } => self.update_csr(cx, *add, *span)?,
            St::Propagate { prop, span } => {
                let t = self.table(cx, fr, *prop).clone();
                let parallel = !self.sequential && cx.pinned.is_none();
                self.graph(cx, |g| propagate_table(g, &t, parallel))
                    .map_err(|source| EngineError::Graph { span: *span, source })?;
            }
            St::Eval(e) => {
                self.eval(cx, fr, l, e)?;
            }
            St::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(cx, fr, l, e)?,
                    None => Value::Unit,
                };
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Next)
    }

    fn set_var(&self, fr: &Frame<'_>, l: &mut Local, var: Var, v: Value) {
        match var {
            Var::Private(i) => l.vals[i as usize] = v,
            Var::Shared(i) => fr.set(i, v),
        }
    }

    fn window(&self) -> Option<&[UpdateRecord]> {
        let r = self.window.read().clone()?;
        Some(&self.updates.as_ref()?.records()[r])
    }

    fn items(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, l: &Local, lp: &Loop) -> R<Items> {
        Ok(match &lp.domain {
            Domain::Nodes => Items::Nodes(self.n),
            Domain::Out(x) | Domain::In(x) => {
                let incoming = matches!(lp.domain, Domain::In(_));
                let v = self.node(self.eval(cx, fr, l, x)?, lp.span)? as NodeId;
                let caller = cx.caller.or(Some(v));
                let edges = self
                    .graph(cx, |g| -> Result<Vec<EdgeVal>, graphdyn_core::GraphError> {
                        Ok(if incoming {
                            g.in_edges(caller, v)?.map(edge_val).collect()
                        } else {
                            g.out_edges(caller, v).map(edge_val).collect()
                        })
                    })
                    .map_err(|source| EngineError::Graph {
                        span: lp.span,
                        source,
                    })?;
                Items::Edges {
                    center: v,
                    incoming,
                    edges,
                }
            }
            Domain::Updates(sel) => {
                let w = self.window().ok_or_else(|| {
                    EngineError::runtime(lp.span, "the current batch is only defined inside a Batch block")
                })?;
                Items::Records(
                    w.iter()
                        .filter(|r| match sel {
                            Selector::All => true,
                            Selector::Deletes => r.is_delete(),
                            Selector::Adds => r.is_add(),
                            Selector::Nothing => false,
                        })
                        .copied()
                        .collect(),
                )
            }
        })
    }

    fn run_loop(&self, cx: &Cx<'_, G>, fr: &Frame<'_>, l: &mut Local, lp: &Loop) -> R<Flow> {
        let started = lp.on_update.then(Instant::now);
        let items = self.items(cx, fr, l, lp)?;
        let flow = match &lp.region {
            Some(region) => {
                self.run_region(cx, fr, lp, region, &items)?;
                Flow::Next
            }
            None => {
                let mut flow = Flow::Next;
                for k in 0..items.len() {
                    let (v, e, _) = items.get(k);
                    if let Flow::Return(r) = self.iteration(cx, fr, l, lp, v, e)? {
                        flow = Flow::Return(r);
                        break;
                    }
                }
                flow
            }
        };
        if let Some(t) = started {
            self.timers.lock().preprocess += t.elapsed();
        }
        Ok(flow)
    }

    fn iteration(
        &self,
        cx: &Cx<'_, G>,
        fr: &Frame<'_>,
        l: &mut Local,
        lp: &Loop,
        v: Value,
        e: Option<Value>,
    ) -> R<Flow> {
        self.set_var(fr, l, lp.var, v);
        if let (Some(ev), Some(e)) = (lp.edge_var, e) {
            self.set_var(fr, l, ev, e);
        }
        if let Some(f) = &lp.filter {
            if !self.eval(cx, fr, l, f)?.as_bool() {
                return Ok(Flow::Next);
            }
        }
        self.exec(cx, fr, l, &lp.body)
    }

    fn run_region(
        &self,
        cx: &Cx<'_, G>,
        fr: &Frame<'_>,
        lp: &Loop,
        region: &Region,
        items: &Items,
    ) -> R<()> {
        let id = self.regions.fetch_add(1, Ordering::Relaxed);
        let len = items.len();
        let chunks = len.div_ceil(CHUNK);
        let tracking = self.tracker.is_some();
        let run_chunk = |c: usize, g: &G| -> R<Vec<Value>> {
            let mut local = Local::for_region(fr.func.private, region);
            for k in c * CHUNK..len.min((c + 1) * CHUNK) {
                let (v, e, caller) = items.get(k);
                let inner = Cx {
                    pinned: Some(g),
                    caller: Some(caller),
                    tag: tracking.then_some((id, k as u64)),
                    ephemeral: cx.ephemeral,
                };
                self.iteration(&inner, fr, &mut local, lp, v, e)?;
            }
            Ok(local.accs)
        };
        let results: Vec<R<Vec<Value>>> = match cx.pinned {
            Some(g) => (0..chunks).map(|c| run_chunk(c, g)).collect(),
            None => {
                let guard = self.graph.read();
                let g: &G = &guard;
                if self.sequential || chunks <= 1 {
                    (0..chunks).map(|c| run_chunk(c, g)).collect()
                } else {
                    (0..chunks).into_par_iter().map(|c| run_chunk(c, g)).collect()
                }
            }
        };
        let mut sums: Vec<Value> = region
            .reductions
            .iter()
            .map(|(slot, _)| fr.get(*slot))
            .collect();
        for r in results {
            let accs = r?;
            for (i, (_, kind)) in region.reductions.iter().enumerate() {
                sums[i] = arith(ArithOp::Add, *kind, sums[i], accs[i])
                    .map_err(|e| EngineError::runtime(lp.span, e.0))?;
            }
        }
        for ((slot, _), v) in region.reductions.iter().zip(sums) {
            fr.set(*slot, v);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn fixed_point(
        &self,
        cx: &Cx<'_, G>,
        fr: &Frame<'_>,
        l: &mut Local,
        var: Var,
        cond: &Ex,
        body: &[St],
        swaps: &[(u32, u32)],
        span: Span,
    ) -> R<Flow> {
        let mut iterations = 0u64;
        loop {
            let done = self.eval(cx, fr, l, cond)?;
            self.set_var(fr, l, var, done);
            if done.as_bool() {
                break;
            }
            if iterations >= self.cap {
                return Err(EngineError::IterationCap {
                    span,
                    cap: self.cap,
                });
            }
            if let Flow::Return(v) = self.exec(cx, fr, l, body)? {
                return Ok(Flow::Return(v));
            }
            for (base, next) in swaps {
                let n = self.table(cx, fr, *next).clone();
                self.table(cx, fr, *base).advance_from(&n);
            }
            iterations += 1;
        }
        let mut stats = self.stats.lock();
        let name = &fr.func.name;
        match stats
            .fixed_points
            .iter_mut()
            .find(|s| s.function == *name && s.line == span.line)
        {
            Some(s) => {
                s.runs += 1;
                s.iterations += iterations;
                s.max_iterations = s.max_iterations.max(iterations);
            }
            None => stats.fixed_points.push(FixedPointStats {
                function: name.clone(),
                line: span.line,
                runs: 1,
                iterations,
                max_iterations: iterations,
            }),
        }
        Ok(Flow::Next)
    }

    fn batch(
        &self,
        cx: &Cx<'_, G>,
        fr: &Frame<'_>,
        l: &mut Local,
        size: &Ex,
        body: &[St],
        span: Span,
    ) -> R<Flow> {
        let total = match &self.updates {
            Some(u) => u.len(),
            None => return Err(EngineError::runtime(span, "no update stream was supplied")),
        };
        let size = self.eval(cx, fr, l, size)?.as_i64();
        if size <= 0 {
            return Err(EngineError::runtime(span, format!("batch size must be positive, got {size}")));
        }
        {
            let mut stats = self.stats.lock();
            if stats.before_batches.is_none() {
                stats.before_batches = Some(self.started.elapsed());
            }
        }
        let size = size as usize;
        let mut start = 0;
        let mut result = Flow::Next;
        while start < total {
            let end = total.min(start + size);
            *self.window.write() = Some(start..end);
            *self.timers.lock() = BatchTimers::default();
            let t0 = Instant::now();
            let flow = self.exec(cx, fr, l, body);
            let merge_started = Instant::now();
            let remap = self.graph.write().finish_batch();
            let merged = remap.is_some();
            if let Some(remap) = remap {
                for t in self.live_edge_tables() {
                    t.remap(&remap);
                }
            }
            let merge_time = merge_started.elapsed();
            let total_time = t0.elapsed();
            let timers = std::mem::take(&mut *self.timers.lock());
            let recs = &self.updates.as_ref().unwrap().records()[start..end];
            let update = timers.update + merge_time;
            let mut stats = self.stats.lock();
            let index = stats.batches.len();
            stats.batches.push(BatchStats {
                index,
                deletes: recs.iter().filter(|r| r.is_delete()).count(),
                adds: recs.iter().filter(|r| r.is_add()).count(),
                deletes_applied: timers.deletes_applied,
                delete_misses: timers.delete_misses,
                adds_applied: timers.adds_applied,
                preprocess: timers.preprocess,
                update,
                propagate: total_time.saturating_sub(timers.preprocess + update),
                merged,
            });
            drop(stats);
            if let Flow::Return(v) = flow? {
                result = Flow::Return(v);
                break;
            }
            start = end;
        }
        *self.window.write() = None;
        Ok(result)
    }

    fn update_csr(&self, cx: &Cx<'_, G>, add: bool, span: Span) -> R<()> {
        if cx.pinned.is_some() {
            return Err(EngineError::runtime(span, "structural updates cannot run inside a parallel loop"));
        }
        let recs = self
            .window()
            .ok_or_else(|| EngineError::runtime(span, "structural updates need a Batch block"))?;
        let t0 = Instant::now();
        let graph_err = |source| EngineError::Graph { span, source };
        if add {
            let (rep, len) = {
                let mut g = self.graph.write();
                let rep = g.update_csr_add(recs).map_err(graph_err)?;
                (rep, g.edge_slot_count())
            };
            for t in self.live_edge_tables() {
                t.grow(len, &rep.claimed);
            }
            let mut tm = self.timers.lock();
            tm.adds_applied += rep.applied;
            tm.update += t0.elapsed();
        } else {
            let rep = self.graph.write().update_csr_del(recs).map_err(graph_err)?;
            let mut tm = self.timers.lock();
            tm.deletes_applied += rep.applied;
            tm.delete_misses += rep.misses.len();
            tm.update += t0.elapsed();
        }
        Ok(())
    }
}
