//! Golden outputs and structural checks on the emitted corpus.
//!
//! Set `GRAPHDYN_BLESS=1` to rewrite the files under `tests/golden/`.

use std::path::PathBuf;

use graphdyn_codegen::{emit_openmp, EmitOptions, Emitted, Schedule, RUNTIME_HEADER};
use graphdyn_dsl::{compile, corpus};
use sha2::{Digest, Sha256};

const HEADER_SHA256: &str = "30cf5d150962e034829e5cc3afdfaa8b0c0674b49285b418d0604b8ede4bb0db";

fn emit(name: &str, src: &str) -> Emitted {
    emit_openmp(&compile(src).unwrap(), &EmitOptions::new(name)).unwrap()
}

/// Everything after the version line.
fn body(source: &str) -> &str {
    source.split_once('\n').map_or("", |(_, rest)| rest)
}

fn function<'a>(source: &'a str, name: &str) -> &'a str {
    let sig = format!(" {name}(");
    let start = source
        .lines()
        .scan(0, |off, l| {
            let at = *off;
            *off += l.len() + 1;
            Some((at, l))
        })
        .find(|(_, l)| !l.starts_with(' ') && l.contains(&sig) && l.ends_with('{'))
        .map(|(at, _)| at)
        .unwrap_or_else(|| panic!("no definition of {name}"));
    let rest = &source[start..];
    let end = rest.find("\n}\n").unwrap();
    &rest[..end + 2]
}

#[test]
fn corpus_matches_goldens() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("GRAPHDYN_BLESS").is_some();
    for (name, src) in corpus::ALL {
        let e = emit(name, src);
        let path = dir.join(&e.file_name);
        if bless {
            std::fs::create_dir_all(&dir).unwrap();
            std::fs::write(&path, &e.source).unwrap();
            continue;
        }
        let golden = std::fs::read_to_string(&path)
            .unwrap_or_else(|err| panic!("{}: {err}; rerun with GRAPHDYN_BLESS=1", path.display()));
        assert!(body(&e.source) == body(&golden), "{} differs from its golden file", e.file_name);
    }
}

#[test]
fn output_is_deterministic() {
    for (name, src) in corpus::ALL {
        let a = emit(name, src);
        let b = emit(name, src);
        assert_eq!(a.source, b.source);
        assert_eq!(a.plan, b.plan);
    }
}

#[test]
fn sssp_incremental_has_one_retry_loop() {
    let e = emit("sssp", corpus::SSSP);
    let inc = function(&e.source, "Incremental");
    assert_eq!(inc.matches("__atomic_compare_exchange(").count(), 1, "{inc}");
    assert!(inc.contains("dist"));
}

#[test]
fn programs_without_forall_have_no_pragmas() {
    let src = "Static f(Graph g, propNode<int> d, node s) { g.attachNodeProperty(d = 0); s.d = 7; int x = 3; x += 2; for (v in g.nodes()) { v.d = x; } }";
    let e = emit("seq", src);
    assert!(!e.source.contains("#pragma"), "{}", e.source);
    assert!(e.plan.loops.is_empty());
    assert!(e.plan.atomics.is_empty());
}

#[test]
fn every_flagged_statement_is_lowered() {
    for (name, src) in corpus::ALL {
        let c = compile(src).unwrap();
        let e = emit_openmp(&c, &EmitOptions::new(name)).unwrap();
        assert!(e.plan.uncovered(&c.access).is_empty(), "{name}");
        assert_eq!(e.plan.atomics.len(), c.access.flagged.len(), "{name}");
        assert_eq!(e.plan.audit(&e.source), Vec::<String>::new(), "{name}");
        assert!(e.plan.transfers.is_empty());
    }
}

#[test]
fn schedule_changes_only_the_pragmas() {
    let c = compile(corpus::PR).unwrap();
    let dynamic = emit_openmp(&c, &EmitOptions::new("pr")).unwrap();
    let mut opts = EmitOptions::new("pr");
    opts.schedule = Schedule::Static;
    let fixed = emit_openmp(&c, &opts).unwrap();
    assert_eq!(dynamic.source.lines().count(), fixed.source.lines().count());
    for (a, b) in dynamic.source.lines().zip(fixed.source.lines()) {
        if a != b {
            assert!(a.contains("schedule(dynamic, 64)") && b.contains("schedule(static)"), "{a}\n{b}");
        }
    }
    assert!(fixed.plan.loops.iter().all(|l| l.pragma.contains("schedule(static)")));
}

#[test]
fn runtime_header_is_pinned() {
    let digest = Sha256::digest(RUNTIME_HEADER.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hex, HEADER_SHA256);
}
