//! Slot-resolved form of a checked program. Every name is replaced by the
//! frame slot, private slot or property slot it denotes, and every implicit
//! conversion is explicit.

use std::collections::{HashMap, HashSet};

use graphdyn_dsl::ast::{FnKind, StmtId};
use graphdyn_dsl::Span;

use crate::value::{ArithOp, CmpOp, Kind, Value};

/// A scalar variable: a frame slot shared by all iterations, or a slot
/// owned by one parallel iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Var {
    Shared(u32),
    Private(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EdgeField {
    Source,
    Destination,
    Weight,
}

#[derive(Debug)]
pub(crate) enum Ex {
    Const(Value),
    Var(Var),
    NodeProp {
        prop: u32,
        node: Box<Ex>,
        span: Span,
    },
    EdgeProp {
        prop: u32,
        edge: Box<Ex>,
        span: Span,
    },
    /// Whether any node's flag is set.
    AnyNode(u32),
    Field(EdgeField, Box<Ex>, Span),
    Arith {
        op: ArithOp,
        kind: Kind,
        a: Box<Ex>,
        b: Box<Ex>,
        span: Span,
    },
    Neg(Kind, Box<Ex>),
    Abs(Kind, Box<Ex>),
    Cmp(CmpOp, Box<Ex>, Box<Ex>),
    And(Box<Ex>, Box<Ex>),
    Or(Box<Ex>, Box<Ex>),
    Not(Box<Ex>),
    Convert(Kind, Kind, Box<Ex>),
    Call {
        func: u32,
        args: Vec<Arg>,
    },
    NumNodes,
    NumEdges,
    GetEdge(Box<Ex>, Box<Ex>, Span),
    IsAnEdge(Box<Ex>, Box<Ex>, Span),
    Degree(Box<Ex>, Span),
    InDegree(Box<Ex>, Span),
}

#[derive(Debug)]
pub(crate) enum Arg {
    Value(Ex),
    Prop(u32),
    Skip,
}

#[derive(Debug)]
pub(crate) enum Place {
    Var(Var),
    Node { prop: u32, node: Ex },
    Edge { prop: u32, edge: Ex },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Selector {
    All,
    Deletes,
    Adds,
    Nothing,
}

impl Selector {
    pub fn and(self, other: Selector) -> Selector {
        use Selector::*;
        match (self, other) {
            (All, x) | (x, All) => x,
            (a, b) if a == b => a,
            _ => Nothing,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Domain {
    Nodes,
    Out(Ex),
    In(Ex),
    Updates(Selector),
}

/// A loop that splits its iterations across workers.
#[derive(Debug)]
pub(crate) struct Region {
    /// Frame slots updated with `+=`/`-=`: each chunk of iterations sums
    /// into its own accumulator and the sums are folded in chunk order.
    pub reductions: Vec<(u32, Kind)>,
}

#[derive(Debug)]
pub(crate) struct Loop {
    pub var: Var,
    pub domain: Domain,
    pub filter: Option<Ex>,
    pub body: Vec<St>,
    /// Holds the edge being traversed by a neighbor loop.
    pub edge_var: Option<Var>,
    pub region: Option<Region>,
    /// `OnAdd`/`OnDelete`, timed as batch preprocessing.
    pub on_update: bool,
    pub span: Span,
}

#[derive(Debug)]
pub(crate) enum St {
    Set {
        place: Place,
        value: Ex,
        id: StmtId,
        span: Span,
    },
    Update {
        place: Place,
        kind: Kind,
        op: ArithOp,
        value: Ex,
        id: StmtId,
        span: Span,
    },
    Accumulate {
        acc: u32,
        kind: Kind,
        op: ArithOp,
        value: Ex,
        id: StmtId,
        span: Span,
    },
    MinMax {
        max: bool,
        kind: Kind,
        guard: Place,
        value: Ex,
        rest: Vec<(Place, Kind, Ex)>,
        id: StmtId,
        span: Span,
    },
    If(Ex, Vec<St>, Vec<St>),
    While(Ex, Vec<St>),
    Loop(Box<Loop>),
    FixedPoint {
        var: Var,
        cond: Ex,
        body: Vec<St>,
        /// `(p, p_nxt)` property slots advanced after every iteration.
        swaps: Vec<(u32, u32)>,
        span: Span,
    },
    Batch {
        size: Ex,
        body: Vec<St>,
        span: Span,
    },
    DeclProp(u32),
    Attach(Vec<(u32, Ex)>),
    CopyProp {
        dst: u32,
        src: u32,
    },
    UpdateCsr {
        add: bool,
        span: Span,
    },
    Propagate {
        prop: u32,
        span: Span,
    },
    Eval(Ex),
    Return(Option<Ex>),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ParamLoc {
    Var(Var, Kind),
    Prop(u32),
    Graph,
    Updates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum PropOrigin {
    Param,
    Local,
    Companion(u32),
}

#[derive(Debug, Clone)]
pub(crate) struct PropSlot {
    pub name: String,
    pub kind: Kind,
    pub edge: bool,
    pub origin: PropOrigin,
}

#[derive(Debug)]
pub(crate) struct Func {
    pub name: String,
    pub kind: FnKind,
    pub params: Vec<(String, ParamLoc)>,
    pub shared: Vec<Kind>,
    /// Names of the declared scalars and parameters among the frame slots.
    pub shared_names: Vec<Option<String>>,
    pub private: u32,
    pub props: Vec<PropSlot>,
    pub body: Vec<St>,
}

#[derive(Debug)]
pub(crate) struct Lowered {
    pub funcs: Vec<Func>,
    pub needs_reverse: bool,
    pub flagged: HashSet<StmtId>,
    /// Function and span of every writing statement.
    pub writes: HashMap<StmtId, (String, Span)>,
}

impl Lowered {
    pub fn func(&self, name: &str) -> Option<u32> {
        self.funcs.iter().position(|f| f.name == name).map(|i| i as u32)
    }
}
