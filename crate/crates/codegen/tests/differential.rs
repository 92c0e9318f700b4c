//! Compiles the emitted programs and checks them against the interpreter.
//! Every test here is skipped, with a notice, when no C++ compiler exists.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use graphdyn_codegen::{compile_smoke, emit_openmp, find_toolchain, EmitOptions, SmokeStatus};
use graphdyn_core::generate::{gen_updates, uniform, GenOptions};
use graphdyn_core::io::EdgeList;
use graphdyn_core::{DynamicGraph, GraphOptions, UpdateRecord, UpdateStream};
use graphdyn_dsl::{compile, corpus};
use graphdyn_engine::{run_program, ExecOptions, Inputs, Value};

struct Built {
    _dir: tempfile::TempDir,
    bins: BTreeMap<&'static str, PathBuf>,
}

fn built() -> Option<&'static Built> {
    static BUILT: OnceLock<Option<Built>> = OnceLock::new();
    BUILT
        .get_or_init(|| {
            let cxx = find_toolchain()?;
            let dir = tempfile::tempdir().unwrap();
            let mut bins = BTreeMap::new();
            for (name, src) in corpus::ALL {
                let c = compile(src).unwrap();
                let e = emit_openmp(&c, &EmitOptions::new(name)).unwrap();
                let r = compile_smoke(&e.source, &e.file_name, dir.path(), Some(&cxx));
                assert_eq!(r.status, SmokeStatus::Passed, "{name} failed to compile:\n{}", r.log);
                bins.insert(name, r.binary.unwrap());
            }
            Some(Built { _dir: dir, bins })
        })
        .as_ref()
}

macro_rules! need_toolchain {
    () => {
        match built() {
            Some(b) => b,
            None => {
                eprintln!("notice: no C++ compiler found, skipping the compiled-code check");
                return;
            }
        }
    };
}

#[derive(Debug, Default)]
struct Csv {
    props: BTreeMap<String, Vec<String>>,
    scalars: BTreeMap<String, String>,
}

fn read_csv(dir: &Path) -> Csv {
    let mut out = Csv::default();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        if path.extension().is_none_or(|e| e != "csv") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        if stem == "scalars" {
            assert_eq!(header, "name,value");
            for l in lines {
                let (k, v) = l.split_once(',').unwrap();
                out.scalars.insert(k.to_string(), v.to_string());
            }
        } else {
            assert_eq!(header, "node,value");
            let values = lines
                .enumerate()
                .map(|(i, l)| {
                    let (n, v) = l.split_once(',').unwrap();
                    assert_eq!(n.parse::<usize>().unwrap(), i);
                    v.to_string()
                })
                .collect();
            out.props.insert(stem, values);
        }
    }
    out
}

struct Case<'a> {
    program: &'static str,
    list: &'a EdgeList,
    updates: &'a UpdateStream,
    undirected: bool,
    sets: Vec<(&'static str, String)>,
}

fn run_binary(b: &Built, case: &Case<'_>) -> Csv {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    let updates = dir.path().join("updates.txt");
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(&graph, case.list.to_text()).unwrap();
    std::fs::write(&updates, case.updates.to_text()).unwrap();
    let mut cmd = Command::new(&b.bins[case.program]);
    cmd.arg(&graph)
        .arg("--updates")
        .arg(&updates)
        .arg("--nodes")
        .arg(case.list.node_count.to_string())
        .arg("--threads")
        .arg("2")
        .arg("--out")
        .arg(&out);
    if case.undirected {
        cmd.arg("--undirected");
    }
    for (k, v) in &case.sets {
        cmd.arg("--set").arg(format!("{k}={v}"));
    }
    let res = cmd.output().unwrap();
    assert!(
        res.status.success(),
        "{} exited with {:?}: {}",
        case.program,
        res.status,
        String::from_utf8_lossy(&res.stderr)
    );
    read_csv(&out)
}

fn run_engine(case: &Case<'_>) -> graphdyn_engine::RunOutput<DynamicGraph> {
    let c = compile(corpus::by_name(case.program).unwrap()).unwrap();
    let opts = GraphOptions {
        directed: !case.undirected,
        reverse: true,
        ..GraphOptions::default()
    };
    let g = DynamicGraph::build_csr(&case.list.edges, case.list.node_count, opts).unwrap();
    let mut inputs = Inputs::new().with_updates(case.updates.clone());
    for (k, v) in &case.sets {
        inputs = match v.parse::<i64>() {
            Ok(i) => inputs.with(k, i),
            Err(_) => inputs.with(k, v.parse::<f64>().unwrap()),
        };
    }
    run_program(&c, g, &inputs, &ExecOptions::default()).unwrap()
}

fn compare(case: &Case<'_>, tolerance: f64) {
    let b = match built() {
        Some(b) => b,
        None => return,
    };
    let native = run_binary(b, case);
    let engine = run_engine(case);
    assert!(!native.props.is_empty() || engine.returned.is_some(), "{}", case.program);
    for (name, got) in &native.props {
        let values = &engine.node_props[name];
        assert_eq!(got.len(), values.values.len());
        for (i, (g, want)) in got.iter().zip(&values.values).enumerate() {
            match want {
                Value::Float(w) => {
                    let g: f64 = g.parse().unwrap();
                    assert!((g - w).abs() < tolerance, "{} {name}[{i}]: {g} vs {w}", case.program);
                }
                Value::Int(w) => assert_eq!(g.parse::<i64>().unwrap(), *w, "{} {name}[{i}]", case.program),
                other => assert_eq!(*g, other.to_string(), "{} {name}[{i}]", case.program),
            }
        }
    }
    match engine.returned {
        Some(v) => assert_eq!(native.scalars["return"], v.to_string(), "{}", case.program),
        None => assert!(!native.scalars.contains_key("return")),
    }
}

fn sssp_sets(batch: usize) -> Vec<(&'static str, String)> {
    vec![("src", "0".into()), ("batchSize", batch.to_string())]
}

fn pr_sets(batch: usize) -> Vec<(&'static str, String)> {
    vec![
        ("batchSize", batch.to_string()),
        ("beta", "1e-10".into()),
        ("damping", "0.85".into()),
        ("maxIter", "500".into()),
    ]
}

#[test]
fn emitted_programs_compile() {
    let b = need_toolchain!();
    assert_eq!(b.bins.len(), 3);
}

#[test]
fn worked_example_gives_forty() {
    let _ = need_toolchain!();
    let list = EdgeList {
        edges: vec![(0, 1, 30), (0, 2, 48), (2, 3, 4), (0, 4, 40), (4, 5, 5), (3, 5, 6)],
        node_count: 6,
        weighted: true,
    };
    let updates = UpdateStream::new(vec![UpdateRecord::add(1, 2, 10), UpdateRecord::delete(4, 5)]);
    let case = Case {
        program: "sssp",
        list: &list,
        updates: &updates,
        undirected: false,
        sets: sssp_sets(2),
    };
    let native = run_binary(built().unwrap(), &case);
    assert_eq!(native.props["dist"], ["0", "30", "40", "44", "40", "50"]);
    compare(&case, 0.0);
}

#[test]
fn two_cycle_ranks_are_equal() {
    let _ = need_toolchain!();
    let list = EdgeList {
        edges: vec![(0, 1, 1), (1, 0, 1)],
        node_count: 2,
        weighted: true,
    };
    let updates = UpdateStream::new(vec![UpdateRecord::delete(0, 1), UpdateRecord::add(0, 1, 1)]);
    let case = Case {
        program: "pr",
        list: &list,
        updates: &updates,
        undirected: false,
        sets: pr_sets(1),
    };
    let native = run_binary(built().unwrap(), &case);
    let r: Vec<f64> = native.props["pageRank"].iter().map(|v| v.parse().unwrap()).collect();
    assert!((r[0] - r[1]).abs() < 1e-9 && (r[0] - 0.5).abs() < 1e-9, "{r:?}");
    compare(&case, 1e-6);
}

#[test]
fn triangle_gives_one() {
    let _ = need_toolchain!();
    let list = EdgeList {
        edges: vec![(0, 1, 1), (1, 2, 1)],
        node_count: 3,
        weighted: true,
    };
    let updates = UpdateStream::new(vec![UpdateRecord::add(2, 0, 1)]);
    let case = Case {
        program: "tc",
        list: &list,
        updates: &updates,
        undirected: true,
        sets: vec![("batchSize", "1".into())],
    };
    let native = run_binary(built().unwrap(), &case);
    assert_eq!(native.scalars["return"], "1");
    compare(&case, 0.0);
}

#[test]
fn compiled_programs_match_the_interpreter() {
    let _ = need_toolchain!();
    for seed in 0..4u64 {
        let gen = |undirected| GenOptions {
            max_weight: 20,
            simple: true,
            undirected,
            seed: 100 + seed,
        };
        let directed = uniform(150 + 40 * seed as usize, 700, gen(false));
        let undirected = uniform(80, 400, gen(true));
        for percent in [5.0, 20.0] {
            let d_up = gen_updates(&directed, false, percent, 0.5, seed).unwrap();
            let u_up = gen_updates(&undirected, true, percent, 0.5, seed).unwrap();
            for batch in [1, 100, d_up.len().max(1)] {
                let case = |program, list, updates, undirected, sets| Case {
                    program,
                    list,
                    updates,
                    undirected,
                    sets,
                };
                compare(&case("sssp", &directed, &d_up, false, sssp_sets(batch)), 0.0);
                compare(&case("pr", &directed, &d_up, false, pr_sets(batch)), 1e-6);
                let tc_sets = vec![("batchSize", batch.to_string())];
                compare(&case("tc", &undirected, &u_up, true, tc_sets), 0.0);
            }
        }
    }
}

#[test]
fn bad_inputs_exit_with_a_message() {
    let b = need_toolchain!();
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    std::fs::write(&graph, "0 1 5\n1 x\n").unwrap();
    let res = Command::new(&b.bins["sssp"]).arg(&graph).output().unwrap();
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("g.txt:2"));

    std::fs::write(&graph, "0 1 5\n").unwrap();
    let res = Command::new(&b.bins["sssp"]).arg(&graph).arg("--bogus").output().unwrap();
    assert_eq!(res.status.code(), Some(1));

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let updates = dir.path().join("u.txt");
    std::fs::write(&updates, "").unwrap();
    let res = Command::new(&b.bins["tc"])
        .arg(&empty)
        .args(["--undirected", "--set", "batchSize=1", "--updates"])
        .arg(&updates)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(String::from_utf8_lossy(&res.stdout), "name,value\nreturn,0\n");
}
