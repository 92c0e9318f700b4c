//! Executes checked graph programs against a dynamic graph.
//!
//! A [`Compiled`] program is lowered once into an [`Executable`], which can
//! then be run on any graph implementing [`Topology`]. Parallel loops run on
//! a dedicated worker pool; node property values are returned in a
//! [`RunOutput`] together with per-batch and per-fixedPoint statistics.

mod error;
mod exec;
mod ir;
mod lower;
mod propagate;
pub mod store;
pub mod topology;
pub mod value;

use std::collections::BTreeMap;
use std::time::Duration;

use graphdyn_core::UpdateStream;
use graphdyn_dsl::ast::FnKind;
use graphdyn_dsl::Compiled;

pub use error::EngineError;
pub use propagate::propagate_node_flags;
pub use topology::Topology;
pub use value::{Kind, Value};

use exec::{Cx, Frame, Local, Machine};
use ir::{Lowered, ParamLoc, PropOrigin, Var};

#[derive(Debug, Clone)]
pub struct ExecOptions {
    pub worker_count: usize,
    /// Run every loop on the calling thread.
    pub deterministic: bool,
    /// Overrides the default fixedPoint cap of `max(10 * nodes, 10)`.
    pub iteration_cap: Option<u64>,
    /// Track writes inside parallel loops and fail if two iterations of
    /// the same loop wrote a location through a statement the access
    /// analysis did not flag.
    pub check_contention: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            deterministic: false,
            iteration_cap: None,
            check_contention: false,
        }
    }
}

/// A scalar program input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Input {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl From<i64> for Input {
    fn from(v: i64) -> Self {
        Input::Int(v)
    }
}

impl From<i32> for Input {
    fn from(v: i32) -> Self {
        Input::Int(v as i64)
    }
}

impl From<u32> for Input {
    fn from(v: u32) -> Self {
        Input::Int(v as i64)
    }
}

impl From<f64> for Input {
    fn from(v: f64) -> Self {
        Input::Float(v)
    }
}

impl From<bool> for Input {
    fn from(v: bool) -> Self {
        Input::Bool(v)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub scalars: BTreeMap<String, Input>,
    pub updates: Option<UpdateStream>,
}

impl Inputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: impl Into<Input>) -> Self {
        self.scalars.insert(name.to_string(), v.into());
        self
    }

    pub fn with_updates(mut self, updates: UpdateStream) -> Self {
        self.updates = Some(updates);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Graph,
    Updates,
    /// A property the program fills in; supplied by the engine.
    Property,
    Scalar(Kind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropValues {
    pub kind: Kind,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, Default)]
pub struct BatchStats {
    pub index: usize,
    pub deletes: usize,
    pub adds: usize,
    pub deletes_applied: usize,
    pub delete_misses: usize,
    pub adds_applied: usize,
    /// `OnDelete`/`OnAdd` loops.
    pub preprocess: Duration,
    /// Structural updates and slot compaction.
    pub update: Duration,
    /// Everything else in the batch body.
    pub propagate: Duration,
    /// Whether the diff blocks were merged into the base after this batch.
    pub merged: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FixedPointStats {
    pub function: String,
    pub line: u32,
    pub runs: u64,
    pub iterations: u64,
    pub max_iterations: u64,
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub total: Duration,
    /// Time until the first Batch block started.
    pub before_batches: Option<Duration>,
    pub batches: Vec<BatchStats>,
    pub fixed_points: Vec<FixedPointStats>,
    /// Statements that wrote a shared location from two iterations of one
    /// parallel loop. Only counted with contention checking on.
    pub contended: usize,
}

#[derive(Debug)]
pub struct RunOutput<G> {
    pub graph: G,
    pub node_props: BTreeMap<String, PropValues>,
    pub scalars: BTreeMap<String, Value>,
    pub returned: Option<Value>,
    pub stats: RunStats,
}

/// A program lowered for execution.
#[derive(Debug)]
pub struct Executable {
    prog: Lowered,
}

impl Executable {
    pub fn new(c: &Compiled) -> Result<Self, EngineError> {
        Ok(Executable {
            prog: lower::lower(c)?,
        })
    }

    /// Whether running needs in-edge adjacency.
    pub fn needs_reverse(&self) -> bool {
        self.prog.needs_reverse
    }

    pub fn dynamic_entry(&self) -> Option<&str> {
        self.entry_of(FnKind::Dynamic)
    }

    pub fn static_entry(&self) -> Option<&str> {
        self.entry_of(FnKind::Static)
    }

    fn entry_of(&self, kind: FnKind) -> Option<&str> {
        self.prog
            .funcs
            .iter()
            .find(|f| f.kind == kind)
            .map(|f| f.name.as_str())
    }

    pub fn params(&self, func: &str) -> Option<Vec<(String, ParamKind)>> {
        let f = &self.prog.funcs[self.prog.func(func)? as usize];
        Some(
            f.params
                .iter()
                .map(|(n, p)| {
                    let k = match p {
                        ParamLoc::Graph => ParamKind::Graph,
                        ParamLoc::Updates => ParamKind::Updates,
                        ParamLoc::Prop(_) => ParamKind::Property,
                        ParamLoc::Var(_, k) => ParamKind::Scalar(*k),
                    };
                    (n.clone(), k)
                })
                .collect(),
        )
    }

    /// Runs `entry` with a fresh worker pool of `opts.worker_count` threads.
    pub fn run<G: Topology>(
        &self,
        entry: &str,
        graph: G,
        inputs: &Inputs,
        opts: &ExecOptions,
    ) -> Result<RunOutput<G>, EngineError> {
        let fi = self
            .prog
            .func(entry)
            .ok_or_else(|| EngineError::UnknownFunction(entry.to_string()))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.worker_count.max(1))
            .build()
            .map_err(|e| EngineError::Pool(e.to_string()))?;
        pool.install(|| self.run_in_pool(fi, graph, inputs, opts))
    }

    fn run_in_pool<G: Topology>(
        &self,
        fi: u32,
        graph: G,
        inputs: &Inputs,
        opts: &ExecOptions,
    ) -> Result<RunOutput<G>, EngineError> {
        let func = &self.prog.funcs[fi as usize];
        let n = graph.node_count();
        if let Some(u) = &inputs.updates {
            u.validate(n).map_err(|e| EngineError::BadInput {
                name: "updates".into(),
                message: e.to_string(),
            })?;
        }
        let cap = opts
            .iteration_cap
            .unwrap_or_else(|| (10 * n as u64).max(10));
        let machine = Machine::new(
            &self.prog,
            graph,
            inputs.updates.clone(),
            opts.deterministic || opts.worker_count <= 1,
            cap,
            opts.check_contention,
        );
        let cx = Cx::top();
        let frame = Frame::new(func);
        for (name, p) in &func.params {
            match p {
                ParamLoc::Var(Var::Shared(i), kind) => {
                    let input = inputs
                        .scalars
                        .get(name)
                        .ok_or_else(|| EngineError::MissingInput(name.clone()))?;
                    frame.set(*i, scalar(name, *input, *kind, n)?);
                }
                ParamLoc::Var(Var::Private(_), _) | ParamLoc::Prop(_) | ParamLoc::Graph => {}
                ParamLoc::Updates => {
                    if inputs.updates.is_none() {
                        return Err(EngineError::MissingInput(name.clone()));
                    }
                }
            }
        }
        let mut local = Local::new(func.private);
        let flow = machine.exec(&cx, &frame, &mut local, &func.body)?;
        let returned = match flow {
            exec::Flow::Return(Value::Unit) | exec::Flow::Next => None,
            exec::Flow::Return(v) => Some(v),
        };

        let (bad, contended) = machine.contention();
        if opts.check_contention && !bad.is_empty() {
            let sites: Vec<String> = bad
                .iter()
                .filter_map(|s| self.prog.writes.get(s))
                .map(|(f, sp)| format!("{f} {}:{}", sp.line, sp.column))
                .collect();
            return Err(EngineError::Unflagged(sites.join(", ")));
        }

        let mut node_props = BTreeMap::new();
        for (slot, p) in func.props.iter().enumerate() {
            if p.edge || matches!(p.origin, PropOrigin::Companion(_)) {
                continue;
            }
            if let Some(t) = frame.props[slot].get() {
                node_props.insert(
                    p.name.clone(),
                    PropValues {
                        kind: p.kind,
                        values: t.snapshot(),
                    },
                );
            }
        }
        let scalars = func
            .shared_names
            .iter()
            .enumerate()
            .filter_map(|(i, n)| Some((n.clone()?, frame.get(i as u32))))
            .collect();
        drop(frame);
        let (graph, mut stats) = machine.into_parts();
        stats.contended = contended;
        Ok(RunOutput {
            graph,
            node_props,
            scalars,
            returned,
            stats,
        })
    }
}

fn scalar(name: &str, input: Input, kind: Kind, n: usize) -> Result<Value, EngineError> {
    let bad = |message: String| EngineError::BadInput {
        name: name.to_string(),
        message,
    };
    let v = match (input, kind) {
        (Input::Bool(b), Kind::Bool) => Value::Bool(b),
        (Input::Int(i), Kind::Node) => {
            if i < 0 || i as usize >= n {
                return Err(bad(format!("node {i} is out of range for {n} nodes")));
            }
            Value::Int(i)
        }
        (Input::Int(i), Kind::Int) => {
            i32::try_from(i).map_err(|_| bad(format!("{i} does not fit an int")))?;
            Value::Int(i)
        }
        (Input::Int(i), Kind::Long) => Value::Int(i),
        (Input::Int(i), k) if k.is_floating() => Value::Float(i as f64),
        (Input::Float(f), k) if k.is_floating() => Value::Float(f),
        (i, k) => return Err(bad(format!("{i:?} is not a valid {k:?}"))),
    };
    Ok(v)
}

/// Runs the program's Dynamic function, or its Static one if it has none.
pub fn run_program<G: Topology>(
    c: &Compiled,
    graph: G,
    inputs: &Inputs,
    opts: &ExecOptions,
) -> Result<RunOutput<G>, EngineError> {
    let exe = Executable::new(c)?;
    let entry = exe
        .dynamic_entry()
        .or(exe.static_entry())
        .ok_or(EngineError::NoEntry)?
        .to_string();
    exe.run(&entry, graph, inputs, opts)
}
