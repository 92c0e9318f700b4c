//! Loading programs and graphs and running a program in either mode.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use anyhow::Context;
use graphdyn_core::io::EdgeList;
use graphdyn_core::{DynamicGraph, GraphOptions, UpdateStream};
use graphdyn_dsl::{compile, corpus, Compiled};
use graphdyn_engine::{
    ExecOptions, Executable, Input, Inputs, Kind, ParamKind, PropValues, RunStats, Value,
};
use graphdyn_partition::{CommStats, Ownership, PartitionedGraph};

use crate::{usage, Failure, Result};

/// A checked program ready to run.
pub struct Program {
    pub name: String,
    pub source: String,
    pub compiled: Compiled,
    pub exe: Executable,
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Program").field("name", &self.name).finish()
    }
}

impl Program {
    /// Reads `arg` as a `.sp` file. A bare `sssp`, `pr` or `tc` that names
    /// no file selects the bundled program of that name.
    pub fn load(arg: &str) -> Result<Program> {
        let path = Path::new(arg);
        if !path.exists() {
            if let Some(src) = corpus::by_name(arg) {
                return Program::from_source(arg, src);
            }
        }
        let source = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read program {arg}: {e}")))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "program".into());
        Program::from_source(&name, &source)
    }

    pub fn from_source(name: &str, source: &str) -> Result<Program> {
        let compiled = compile(source).map_err(|d| {
            let lines: Vec<String> = d.0.iter().map(|d| format!("{name}.sp:{d}")).collect();
            Failure::Compile(lines.join("\n"))
        })?;
        let exe = Executable::new(&compiled).map_err(|e| Failure::Compile(format!("{name}.sp:{e}")))?;
        Ok(Program {
            name: name.to_string(),
            source: source.to_string(),
            compiled,
            exe,
        })
    }

    /// Name of the bundled program this is a verbatim copy of.
    pub fn bundled(&self) -> Option<&'static str> {
        corpus::ALL
            .iter()
            .find(|(_, s)| *s == self.source)
            .map(|(n, _)| *n)
    }

    pub fn entry(&self, mode: Mode) -> Result<String> {
        let e = match mode {
            Mode::Dynamic => self.exe.dynamic_entry(),
            Mode::Static => self.exe.static_entry(),
        };
        e.map(str::to_string)
            .ok_or_else(|| usage(format!("{} has no {mode} function", self.name)))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Mode {
    /// Apply every update up front, then run the Static function.
    Static,
    /// Run the Dynamic function over the update stream.
    #[default]
    Dynamic,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "static" => Ok(Mode::Static),
            "dynamic" => Ok(Mode::Dynamic),
            _ => Err(format!("unknown mode `{s}` (expected static or dynamic)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Static => "Static",
            Mode::Dynamic => "Dynamic",
        })
    }
}

/// A graph file as loaded, before the store is built.
#[derive(Debug, Clone)]
pub struct GraphInput {
    pub list: EdgeList,
    pub undirected: bool,
    pub merge_interval: usize,
}

impl GraphInput {
    pub fn read(path: &Path, nodes: Option<usize>, undirected: bool, merge_interval: usize) -> Result<Self> {
        let mut list =
            EdgeList::read(path).with_context(|| format!("cannot load graph {}", path.display()))?;
        if let Some(n) = nodes {
            if n < list.node_count {
                return Err(usage(format!(
                    "--nodes {n} is smaller than the {} nodes the graph file mentions",
                    list.node_count
                )));
            }
            list.node_count = n;
        }
        Ok(GraphInput::new(list, undirected, merge_interval))
    }

    pub fn new(list: EdgeList, undirected: bool, merge_interval: usize) -> Self {
        GraphInput {
            list,
            undirected,
            merge_interval,
        }
    }

    pub fn build(&self) -> Result<DynamicGraph> {
        let opts = GraphOptions {
            directed: !self.undirected,
            weighted: true,
            reverse: true,
            merge_interval: self.merge_interval.max(1),
        };
        Ok(DynamicGraph::build_csr(&self.list.edges, self.list.node_count, opts)?)
    }
}

/// Scalar inputs. Parameters are matched by kind and name: node inputs take
/// `src`, names containing `batch` take `batch`, and `damping`, `beta` and
/// `maxIter` take theirs. `sets` overrides all of these.
#[derive(Debug, Clone)]
pub struct Scalars {
    pub src: Option<i64>,
    pub batch: Option<i64>,
    pub damping: f64,
    pub beta: f64,
    pub max_iter: i64,
    pub sets: BTreeMap<String, String>,
}

impl Default for Scalars {
    fn default() -> Self {
        Scalars {
            src: None,
            batch: None,
            damping: 0.85,
            beta: 1e-10,
            max_iter: 500,
            sets: BTreeMap::new(),
        }
    }
}

fn parse_input(name: &str, kind: Kind, text: &str) -> Result<Input> {
    let bad = || usage(format!("input `{name}`: `{text}` is not a valid {kind:?}"));
    match kind {
        Kind::Bool => match text {
            "true" | "True" | "1" => Ok(Input::Bool(true)),
            "false" | "False" | "0" => Ok(Input::Bool(false)),
            _ => Err(bad()),
        },
        k if k.is_floating() => text.parse().map(Input::Float).map_err(|_| bad()),
        Kind::Edge => Err(usage(format!("input `{name}`: edge inputs are not supported"))),
        _ => text.parse().map(Input::Int).map_err(|_| bad()),
    }
}

impl Scalars {
    fn value(&self, name: &str, kind: Kind) -> Result<Input> {
        if let Some(text) = self.sets.get(name) {
            return parse_input(name, kind, text);
        }
        let lower = name.to_ascii_lowercase();
        let found = if kind == Kind::Node {
            self.src.map(Input::Int).ok_or_else(|| usage(format!("missing --src (for `{name}`)")))
        } else if lower.contains("batch") {
            self.batch.map(Input::Int).ok_or_else(|| usage(format!("missing --batch (for `{name}`)")))
        } else if lower == "damping" {
            Ok(Input::Float(self.damping))
        } else if lower == "beta" {
            Ok(Input::Float(self.beta))
        } else if lower == "maxiter" || lower == "max_iter" {
            Ok(Input::Int(self.max_iter))
        } else {
            Err(usage(format!("missing input `{name}` (pass --set {name}=VALUE)")))
        };
        match (found?, kind) {
            (Input::Int(i), k) if k.is_floating() => Ok(Input::Float(i as f64)),
            (v, _) => Ok(v),
        }
    }

    /// Inputs for `entry`, with the update stream if it takes one.
    pub fn inputs(&self, program: &Program, entry: &str, updates: Option<&UpdateStream>) -> Result<Inputs> {
        let params = program.exe.params(entry).expect("entry exists");
        let mut inputs = Inputs::new();
        for (name, kind) in params {
            match kind {
                ParamKind::Graph | ParamKind::Property => {}
                ParamKind::Updates => {
                    let u = updates.ok_or_else(|| usage(format!("`{entry}` needs --updates")))?;
                    inputs = inputs.with_updates(u.clone());
                }
                ParamKind::Scalar(k) => {
                    inputs.scalars.insert(name.clone(), self.value(&name, k)?);
                }
            }
        }
        Ok(inputs)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub iteration_cap: Option<u64>,
    /// Run on a simulated partition over this many ranks.
    pub ranks: Option<usize>,
    pub ownership: Ownership,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Dynamic,
            threads: 0,
            iteration_cap: None,
            ranks: None,
            ownership: Ownership::Block,
        }
    }
}

/// The entry's property parameters, in parameter order, and its result.
#[derive(Debug, Clone, Default)]
pub struct Outputs {
    pub props: Vec<(String, PropValues)>,
    pub returned: Option<Value>,
}

impl Outputs {
    pub fn prop(&self, name: &str) -> Option<&PropValues> {
        self.props.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    pub fn csv_files(&self) -> Vec<(String, String)> {
        let mut files = Vec::new();
        for (name, p) in &self.props {
            let mut body = String::from("node,value\n");
            for (i, v) in p.values.iter().enumerate() {
                body.push_str(&format!("{i},{v}\n"));
            }
            files.push((format!("{name}.csv"), body));
        }
        if let Some(v) = &self.returned {
            files.push(("scalars.csv".into(), format!("name,value\nreturn,{v}\n")));
        }
        files
    }

    /// Writes every file into `dir`, or returns the first one's body for
    /// printing when there is no directory.
    pub fn write(&self, dir: Option<&Path>) -> Result<Option<String>> {
        let files = self.csv_files();
        match dir {
            Some(d) => {
                std::fs::create_dir_all(d).with_context(|| format!("cannot create {}", d.display()))?;
                for (name, body) in files {
                    let p = d.join(name);
                    std::fs::write(&p, body).with_context(|| format!("cannot write {}", p.display()))?;
                }
                Ok(None)
            }
            None => Ok(files.into_iter().next().map(|(_, b)| b)),
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub entry: String,
    pub outputs: Outputs,
    pub stats: RunStats,
    /// Time spent applying updates before a static run.
    pub static_update: Option<Duration>,
    pub comm: Option<CommStats>,
    pub node_count: usize,
    pub edge_count: usize,
}

/// Applies `updates` in windows of `batch` records, deletes first.
pub fn apply_updates(g: &mut DynamicGraph, updates: &UpdateStream, batch: usize) -> Result<()> {
    for chunk in updates.records().chunks(batch.max(1)) {
        g.update_csr_del(chunk)?;
        g.update_csr_add(chunk)?;
        g.finish_batch();
    }
    Ok(())
}

fn collect<G>(program: &Program, entry: &str, out: &graphdyn_engine::RunOutput<G>) -> Outputs {
    let props = program
        .exe
        .params(entry)
        .unwrap_or_default()
        .into_iter()
        .filter(|(_, k)| *k == ParamKind::Property)
        .filter_map(|(n, _)| out.node_props.get(&n).map(|p| (n, p.clone())))
        .collect();
    Outputs {
        props,
        returned: out.returned,
    }
}

/// Runs `program` on `graph`. Static mode applies the updates first, in
/// windows of `scalars.batch` records when given.
pub fn execute(
    program: &Program,
    graph: &GraphInput,
    updates: Option<&UpdateStream>,
    scalars: &Scalars,
    cfg: &RunConfig,
) -> Result<Outcome> {
    let entry = program.entry(cfg.mode)?;
    let mut g = graph.build()?;
    let mut static_update = None;
    if cfg.mode == Mode::Static {
        if let Some(u) = updates {
            let batch = scalars.batch.map_or(u.len(), |b| b.max(1) as usize);
            let t = Instant::now();
            apply_updates(&mut g, u, batch)?;
            static_update = Some(t.elapsed());
        }
    }
    let inputs = scalars.inputs(program, &entry, updates)?;
    let opts = ExecOptions {
        worker_count: if cfg.threads == 0 {
            ExecOptions::default().worker_count
        } else {
            cfg.threads
        },
        iteration_cap: cfg.iteration_cap,
        ..ExecOptions::default()
    };
    let node_count = g.node_count();
    match cfg.ranks {
        Some(r) => {
            let pg = PartitionedGraph::with_ownership(&g, r, cfg.ownership)?;
            drop(g);
            let out = program.exe.run(&entry, pg, &inputs, &opts)?;
            Ok(Outcome {
                outputs: collect(program, &entry, &out),
                edge_count: out.graph.edges().len(),
                comm: Some(out.graph.comm()),
                stats: out.stats,
                static_update,
                node_count,
                entry,
            })
        }
        None => {
            let out = program.exe.run(&entry, g, &inputs, &opts)?;
            Ok(Outcome {
                outputs: collect(program, &entry, &out),
                edge_count: out.graph.live_edge_count(),
                comm: None,
                stats: out.stats,
                static_update,
                node_count,
                entry,
            })
        }
    }
}

/// Values compared when checking two runs of `program` for equivalence:
/// the shared property outputs and the return value. SSSP parents are left
/// out because equal-length paths make them tie-dependent.
pub fn default_keys(program: &Program, a: &Outputs, b: &Outputs) -> Vec<String> {
    if program.bundled() == Some("sssp") {
        return vec!["dist".into()];
    }
    let mut keys: Vec<String> = a
        .props
        .iter()
        .filter(|(n, _)| b.prop(n).is_some())
        .map(|(n, _)| n.clone())
        .collect();
    if a.returned.is_some() || b.returned.is_some() {
        keys.push("return".into());
    }
    keys
}

/// Checks `a` against `b` on `keys`: integers and booleans exactly, floats
/// to an absolute `tolerance`. Returns the first difference.
pub fn compare(a: &Outputs, b: &Outputs, keys: &[String], tolerance: f64) -> Result<(), String> {
    let same = |x: &Value, y: &Value| match (x, y) {
        (Value::Float(p), Value::Float(q)) => (p - q).abs() < tolerance || p == q,
        _ => x == y,
    };
    for key in keys {
        if key == "return" {
            match (&a.returned, &b.returned) {
                (Some(x), Some(y)) if same(x, y) => {}
                (x, y) => return Err(format!("return value: {x:?} vs {y:?}")),
            }
            continue;
        }
        let (Some(x), Some(y)) = (a.prop(key), b.prop(key)) else {
            return Err(format!("property `{key}` is missing from one of the runs"));
        };
        if x.values.len() != y.values.len() {
            return Err(format!("property `{key}` has {} vs {} values", x.values.len(), y.values.len()));
        }
        if let Some(i) = (0..x.values.len()).find(|&i| !same(&x.values[i], &y.values[i])) {
            return Err(format!("{key}[{i}]: {} vs {}", x.values[i], y.values[i]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked_example() -> GraphInput {
        let list = EdgeList::parse("0 1 30\n0 2 48\n2 3 4\n0 4 40\n4 5 5\n3 5 6\n").unwrap();
        GraphInput::new(list, false, 1)
    }

    #[test]
    fn static_and_dynamic_modes_agree_on_the_worked_example() {
        let p = Program::load("sssp").unwrap();
        let u = UpdateStream::parse("a 1 2 10\nd 4 5\n").unwrap();
        let scalars = Scalars {
            src: Some(0),
            batch: Some(2),
            ..Scalars::default()
        };
        let mut cfg = RunConfig {
            threads: 2,
            ..RunConfig::default()
        };
        let dynamic = execute(&p, &worked_example(), Some(&u), &scalars, &cfg).unwrap();
        cfg.mode = Mode::Static;
        let fixed = execute(&p, &worked_example(), Some(&u), &scalars, &cfg).unwrap();
        let dist: Vec<i64> = dynamic.outputs.prop("dist").unwrap().values.iter().map(|v| v.as_i64()).collect();
        assert_eq!(dist, [0, 30, 40, 44, 40, 50]);
        let keys = default_keys(&p, &dynamic.outputs, &fixed.outputs);
        assert_eq!(keys, ["dist"]);
        compare(&dynamic.outputs, &fixed.outputs, &keys, 0.0).unwrap();
        assert!(fixed.static_update.is_some());
        assert_eq!(dynamic.stats.batches.len(), 1);
    }

    #[test]
    fn missing_src_is_a_usage_error() {
        let p = Program::load("sssp").unwrap();
        let u = UpdateStream::parse("d 0 1\n").unwrap();
        let scalars = Scalars {
            batch: Some(1),
            ..Scalars::default()
        };
        let err = execute(&p, &worked_example(), Some(&u), &scalars, &RunConfig::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1, "{err}");
        assert!(err.to_string().contains("--src"));
    }

    #[test]
    fn sets_override_conventions() {
        let p = Program::load("pr").unwrap();
        let mut scalars = Scalars::default();
        scalars.sets.insert("beta".into(), "0.5".into());
        scalars.sets.insert("maxIter".into(), "x".into());
        let entry = p.entry(Mode::Static).unwrap();
        let err = scalars.inputs(&p, &entry, None).unwrap_err();
        assert!(err.to_string().contains("maxIter"));
        scalars.sets.remove("maxIter");
        let inputs = scalars.inputs(&p, &entry, None).unwrap();
        assert_eq!(inputs.scalars["beta"], Input::Float(0.5));
        assert_eq!(inputs.scalars["maxIter"], Input::Int(500));
    }

    #[test]
    fn compile_errors_have_their_own_exit_code() {
        let err = Program::from_source("bad", "Static f(Graph g) { int x = ; }").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().starts_with("bad.sp:1:"), "{err}");
    }

    #[test]
    fn floats_compare_within_tolerance() {
        let out = |f: f64| Outputs {
            props: vec![(
                "r".into(),
                PropValues {
                    kind: Kind::Double,
                    values: vec![Value::Float(f)],
                },
            )],
            returned: None,
        };
        let keys = vec!["r".to_string()];
        assert!(compare(&out(0.5), &out(0.5 + 1e-8), &keys, 1e-6).is_ok());
        assert!(compare(&out(0.5), &out(0.5 + 1e-5), &keys, 1e-6).is_err());
    }
}
