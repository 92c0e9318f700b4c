use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use graphdyn::bench::{self, BenchConfig};
use graphdyn::manifest::{comm_rows, Manifest, Timings};
use graphdyn::oracle::{self, Algo, OracleArgs};
use graphdyn::run::{execute, GraphInput, Mode, Outcome, Program, RunConfig, Scalars};
use graphdyn::{Failure, Result};
use graphdyn_codegen::{compile_smoke, emit, write_output, Backend, EmitOptions, Schedule, SmokeStatus};
use graphdyn_core::generate::{gen_updates, rmat, uniform, GenOptions, RmatParams};
use graphdyn_core::io::read_updates;
use graphdyn_core::UpdateStream;
use graphdyn_partition::Ownership;

/// Dynamic graph DSL: run, benchmark, simulate and compile graph programs.
#[derive(Parser)]
#[command(name = "graphdyn", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a program on a graph.
    Run(RunArgs),
    /// Run a program on a graph split across simulated ranks.
    Sim(SimArgs),
    /// Compare static recompute with dynamic maintenance.
    Bench(BenchArgs),
    /// Sample an update stream for a graph.
    GenUpdates(GenUpdatesArgs),
    /// Generate a synthetic graph.
    GenGraph(GenGraphArgs),
    /// Emit C++ for a program.
    Emit(EmitArgs),
    /// Run a reference algorithm.
    Oracle(OracleCmd),
}

#[derive(Args)]
struct GraphArgs {
    /// Graph file: one `src dst [weight]` edge per line.
    graph: PathBuf,
    /// Node count, if larger than 1 + the largest id in the file.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    undirected: bool,
    /// Merge diff blocks into the main CSR every K batches.
    #[arg(long, default_value_t = 1)]
    merge_interval: usize,
}

impl GraphArgs {
    fn load(&self) -> Result<GraphInput> {
        if self.merge_interval == 0 {
            return Err(Failure::Usage("--merge-interval must be positive".into()));
        }
        GraphInput::read(&self.graph, self.nodes, self.undirected, self.merge_interval)
    }
}

#[derive(Args)]
struct ScalarArgs {
    /// Source node.
    #[arg(long)]
    src: Option<i64>,
    /// Update records per batch.
    #[arg(long)]
    batch: Option<i64>,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    /// Convergence threshold.
    #[arg(long, default_value_t = 1e-10)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: i64,
    /// Any program input, as NAME=VALUE.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    sets: Vec<String>,
}

impl ScalarArgs {
    fn scalars(&self) -> Result<Scalars> {
        let mut sets = BTreeMap::new();
        for kv in &self.sets {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Failure::Usage(format!("--set expects NAME=VALUE, got `{kv}`")))?;
            sets.insert(k.to_string(), v.to_string());
        }
        if self.batch.is_some_and(|b| b <= 0) {
            return Err(Failure::Usage("--batch must be positive".into()));
        }
        Ok(Scalars {
            src: self.src,
            batch: self.batch,
            damping: self.damping,
            beta: self.beta,
            max_iter: self.max_iter,
            sets,
        })
    }
}

#[derive(Args)]
struct ExecArgs {
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// fixedPoint iteration cap.
    #[arg(long)]
    iteration_cap: Option<u64>,
    /// Recorded in the manifest.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for result CSVs and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest path when there is no --out directory.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

impl OutArgs {
    fn manifest_path(&self) -> Option<PathBuf> {
        self.manifest
            .clone()
            .or_else(|| self.out.as_ref().map(|d| d.join("manifest.json")))
    }
}

#[derive(Args)]
struct RunArgs {
    /// Program file, or a bundled program name: sssp, pr, tc.
    program: String,
    #[command(flatten)]
    graph: GraphArgs,
    /// Update stream: `a src dst [weight]` / `d src dst` per line.
    #[arg(long)]
    updates: Option<PathBuf>,
    #[arg(long, default_value = "dynamic")]
    mode: Mode,
    #[command(flatten)]
    scalars: ScalarArgs,
    #[command(flatten)]
    exec: ExecArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Number of simulated ranks.
    #[arg(long)]
    ranks: usize,
    /// Assign nodes by hash instead of contiguous blocks.
    #[arg(long)]
    hash_ownership: bool,
}

#[derive(Args)]
struct BenchArgs {
    program: String,
    #[command(flatten)]
    graph: GraphArgs,
    /// Update percentages of the edge count.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    percents: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    add_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Timed repetitions per point; the fastest is reported.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long)]
    ranks: Option<usize>,
    /// Outputs that must agree, comma separated (`return` for the result).
    #[arg(long, value_delimiter = ',')]
    compare: Option<Vec<String>>,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    #[command(flatten)]
    scalars: ScalarArgs,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    iteration_cap: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenUpdatesArgs {
    graph: PathBuf,
    #[arg(long)]
    percent: f64,
    #[arg(long, default_value_t = 0.5)]
    add_fraction: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    undirected: bool,
    /// Output file; stdout if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenGraphArgs {
    /// `rmat` or `uniform`.
    #[arg(long, default_value = "rmat")]
    kind: String,
    /// Node count as a power of two, for rmat.
    #[arg(long)]
    scale: Option<u32>,
    /// Node count, for uniform.
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    edges: usize,
    #[arg(long, default_value_t = 100)]
    max_weight: i32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    undirected: bool,
    /// Drop self-loops and duplicate edges.
    #[arg(long)]
    simple: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    file: String,
    #[arg(long, default_value = "omp")]
    backend: Backend,
    #[arg(long, default_value = "dynamic")]
    schedule: Schedule,
    /// Output name; `<name>_omp.cc`.
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also compile the output with the host C++ compiler.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct OracleCmd {
    /// sssp, pr or tc.
    algo: Algo,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    updates: Option<PathBuf>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    src: Option<u32>,
    #[arg(long, default_value_t = 0.85)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    beta: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn load_updates(path: Option<&Path>) -> Result<Option<UpdateStream>> {
    path.map(|p| read_updates(p).with_context(|| format!("cannot load updates {}", p.display())))
        .transpose()
        .map_err(Failure::from)
}

fn print(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .with_context(|| format!("cannot write {}", p.display()))
            .map_err(Failure::from),
        None => print(text),
    }
}

fn base_manifest(command: &str, a: &RunArgs, program: &Program) -> Result<Manifest> {
    let mut m = Manifest::new(command);
    m.seed = a.exec.seed;
    m.input_bytes("program", &a.program, program.source.as_bytes());
    m.input_file("graph", &a.graph.graph)?;
    if let Some(u) = &a.updates {
        m.input_file("updates", u)?;
    }
    m.set("mode", a.mode.to_string());
    m.set("threads", a.exec.threads);
    m.set("merge_interval", a.graph.merge_interval);
    m.set("undirected", a.graph.undirected);
    m.set("batch", a.scalars.batch);
    Ok(m)
}

fn finish_run(a: &RunArgs, mut m: Manifest, outcome: &Outcome) -> Result<()> {
    m.set("entry", &outcome.entry);
    m.node_count = Some(outcome.node_count);
    m.edge_count = Some(outcome.edge_count);
    m.timings = Some(Timings::new(&outcome.stats, outcome.static_update));
    if let Some(c) = &outcome.comm {
        m.comm = comm_rows(c);
    }
    m.outputs = outcome.outputs.csv_files().into_iter().map(|(n, _)| n).collect();
    if let Some(body) = outcome.outputs.write(a.out.out.as_deref())? {
        if outcome.comm.is_none() {
            print(&body)?;
        }
    }
    if let (Some(c), Some(dir)) = (&outcome.comm, &a.out.out) {
        let p = dir.join("comm.csv");
        std::fs::write(&p, c.to_csv()).with_context(|| format!("cannot write {}", p.display()))?;
        m.outputs.push("comm.csv".into());
    } else if let Some(c) = &outcome.comm {
        print(&c.to_csv())?;
    }
    if let Some(p) = a.out.manifest_path() {
        m.write(&p)?;
    }
    Ok(())
}

fn run_cmd(a: &RunArgs, ranks: Option<usize>, ownership: Ownership) -> Result<()> {
    let program = Program::load(&a.program)?;
    let graph = a.graph.load()?;
    let updates = load_updates(a.updates.as_deref())?;
    let scalars = a.scalars.scalars()?;
    let cfg = RunConfig {
        mode: a.mode,
        threads: a.exec.threads,
        iteration_cap: a.exec.iteration_cap,
        ranks,
        ownership,
    };
    let mut m = base_manifest(if ranks.is_some() { "sim" } else { "run" }, a, &program)?;
    if let Some(r) = ranks {
        m.set("ranks", r);
        m.set("ownership", format!("{ownership:?}").to_lowercase());
    }
    let outcome = execute(&program, &graph, updates.as_ref(), &scalars, &cfg)?;
    finish_run(a, m, &outcome)
}

fn bench_cmd(a: &BenchArgs) -> Result<()> {
    let program = Program::load(&a.program)?;
    let graph = a.graph.load()?;
    let scalars = a.scalars.scalars()?;
    let cfg = BenchConfig {
        percents: a.percents.clone(),
        add_fraction: a.add_fraction,
        seed: a.seed,
        batch: scalars.batch.map(|b| b as usize),
        reps: a.reps,
        run: RunConfig {
            threads: a.threads,
            iteration_cap: a.iteration_cap,
            ranks: a.ranks,
            ..RunConfig::default()
        },
        compare: a.compare.clone(),
        tolerance: a.tolerance,
    };
    let rows = bench::bench(&program, &graph, &scalars, &cfg)?;
    let csv = bench::to_csv(&rows);
    let mut m = Manifest::new("bench");
    m.seed = Some(a.seed);
    m.input_bytes("program", &a.program, program.source.as_bytes());
    m.input_file("graph", &a.graph.graph)?;
    m.set("percents", &a.percents);
    m.set("add_fraction", a.add_fraction);
    m.set("reps", a.reps);
    m.set("ranks", a.ranks);
    m.set("threads", a.threads);
    m.set("tolerance", a.tolerance);
    m.node_count = Some(graph.list.node_count);
    m.edge_count = Some(graph.list.edges.len());
    m.rows = rows
        .iter()
        .map(|r| serde_json::to_value(r).expect("serializable"))
        .collect();
    match &a.out.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            std::fs::write(dir.join("bench.csv"), &csv)?;
            m.outputs.push("bench.csv".into());
        }
        None => print(&csv)?,
    }
    if let Some(p) = a.out.manifest_path() {
        m.write(&p)?;
    }
    Ok(())
}

fn gen_updates_cmd(a: &GenUpdatesArgs) -> Result<()> {
    if !(a.percent > 0.0 && a.percent <= 100.0) {
        return Err(Failure::Usage(format!("--percent {} outside (0, 100]", a.percent)));
    }
    if !(0.0..=1.0).contains(&a.add_fraction) {
        return Err(Failure::Usage(format!("--add-fraction {} outside [0, 1]", a.add_fraction)));
    }
    let graph = GraphInput::read(&a.graph, None, a.undirected, 1)?;
    let stream = gen_updates(&graph.list, a.undirected, a.percent, a.add_fraction, a.seed)?;
    write_or_print(a.output.as_deref(), &stream.to_text())
}

fn gen_graph_cmd(a: &GenGraphArgs) -> Result<()> {
    let opts = GenOptions {
        max_weight: a.max_weight,
        simple: a.simple,
        undirected: a.undirected,
        seed: a.seed,
    };
    if a.max_weight < 1 {
        return Err(Failure::Usage("--max-weight must be at least 1".into()));
    }
    let list = match a.kind.as_str() {
        "rmat" => {
            let scale = a.scale.ok_or_else(|| Failure::Usage("rmat needs --scale".into()))?;
            if !(1..=31).contains(&scale) {
                return Err(Failure::Usage("--scale must lie in 1..=31".into()));
            }
            rmat(scale, a.edges, RmatParams::default(), opts)
        }
        "uniform" => {
            let n = a.nodes.ok_or_else(|| Failure::Usage("uniform needs --nodes".into()))?;
            uniform(n, a.edges, opts)
        }
        k => return Err(Failure::Usage(format!("unknown graph kind `{k}` (expected rmat or uniform)"))),
    };
    write_or_print(a.output.as_deref(), &list.to_text())
}

fn emit_cmd(a: &EmitArgs) -> Result<()> {
    let program = Program::load(&a.file)?;
    let mut opts = EmitOptions::new(a.name.clone().unwrap_or_else(|| program.name.clone()));
    opts.schedule = a.schedule;
    let emitted = emit(a.backend, &program.compiled, &opts).map_err(|d| {
        let lines: Vec<String> = d.0.iter().map(|d| format!("{}.sp:{d}", program.name)).collect();
        Failure::Compile(lines.join("\n"))
    })?;
    let path = write_output(&a.out, &emitted).with_context(|| format!("cannot write into {}", a.out.display()))?;
    println!("{}", path.display());
    eprintln!(
        "{} parallel loops, {} atomic sites",
        emitted.plan.loops.len(),
        emitted.plan.atomics.len()
    );
    if a.check {
        let report = compile_smoke(&emitted.source, &emitted.file_name, &a.out, None);
        match report.status {
            SmokeStatus::Passed => eprintln!("compiled {}", report.binary.unwrap().display()),
            SmokeStatus::Skipped => eprintln!("notice: {}", report.log),
            SmokeStatus::Failed => {
                return Err(Failure::Runtime(anyhow::anyhow!("C++ compile failed:\n{}", report.log)))
            }
        }
    }
    Ok(())
}

fn oracle_cmd(a: &OracleCmd) -> Result<()> {
    let graph = a.graph.load()?;
    let updates = load_updates(a.updates.as_deref())?;
    let args = OracleArgs {
        algo: a.algo,
        undirected: a.graph.undirected,
        src: a.src,
        damping: a.damping,
        beta: a.beta,
        max_iter: a.max_iter,
        batch: a.batch,
    };
    let text = oracle::run(&graph.list, updates.as_ref(), &args)?;
    write_or_print(a.output.as_deref(), &text)
}

fn dispatch(cmd: &Cmd) -> Result<()> {
    match cmd {
        Cmd::Run(a) => run_cmd(a, None, Ownership::Block),
        Cmd::Sim(a) => {
            let own = if a.hash_ownership {
                Ownership::Hash
            } else {
                Ownership::Block
            };
            run_cmd(&a.run, Some(a.ranks), own)
        }
        Cmd::Bench(a) => bench_cmd(a),
        Cmd::GenUpdates(a) => gen_updates_cmd(a),
        Cmd::GenGraph(a) => gen_graph_cmd(a),
        Cmd::Emit(a) => emit_cmd(a),
        Cmd::Oracle(a) => oracle_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
