use graphdyn_dsl::ast::{ExprKind, FnKind, StmtKind};
use graphdyn_dsl::lexer::Keyword;
use graphdyn_dsl::{
    analyze_access, compile, corpus, normalized, parse_source, pretty_print, strip_dead_code,
    tokenize, typecheck, Sync, TokenKind,
};
use proptest::prelude::*;

#[test]
fn sssp_lexes_cleanly() {
    let (tokens, diags) = tokenize(corpus::SSSP);
    assert!(diags.is_empty());
    assert!(tokens.len() > 100);
}

#[test]
fn sssp_batch_processes_deletions_before_additions() {
    let p = parse_source(corpus::SSSP).unwrap();
    let driver = p.entry().unwrap();
    assert_eq!(driver.kind, FnKind::Dynamic);
    let batch = driver
        .body
        .stmts
        .iter()
        .find_map(|s| match &s.kind {
            StmtKind::Batch {
                updates,
                size,
                body,
            } => Some((updates, size, body)),
            _ => None,
        })
        .unwrap();
    assert_eq!(batch.0, "updateBatch");
    assert_eq!(batch.1.as_ident(), Some("batchSize"));
    let shape: Vec<String> = batch
        .2
        .stmts
        .iter()
        .map(|s| match &s.kind {
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Call { name, .. } | ExprKind::Method { name, .. } => name.clone(),
                _ => "?".into(),
            },
            other => other.name().to_string(),
        })
        .collect();
    assert_eq!(
        shape,
        [
            "OnDelete",
            "updateCSRDel",
            "Decremental",
            "OnAdd",
            "updateCSRAdd",
            "Incremental"
        ]
    );
}

#[test]
fn corpus_round_trips_through_the_printer() {
    for (name, src) in corpus::ALL {
        let a = parse_source(src).unwrap();
        let text = pretty_print(&a);
        let b = parse_source(&text).unwrap_or_else(|d| panic!("{name}: {d}"));
        assert_eq!(normalized(&a), normalized(&b), "{name}");
        assert_eq!(text, pretty_print(&b));
    }
}

#[test]
fn corpus_relaxations_are_atomic_by_construction() {
    let c = compile(corpus::SSSP).unwrap();
    let mut mins = 0;
    for f in &c.program.functions {
        f.body.walk(&mut |s| {
            if let StmtKind::MinMax { .. } = s.kind {
                mins += 1;
                assert_eq!(c.access.sync(s.id), Some(Sync::MinMax));
            }
        });
    }
    assert_eq!(mins, 2);
    let tc = compile(corpus::TC).unwrap();
    let reductions = tc
        .access
        .flagged
        .values()
        .filter(|a| a.sync == Sync::Reduction)
        .count();
    assert_eq!(reductions, 3);
}

#[test]
fn corpus_has_no_dead_code() {
    for (name, src) in corpus::ALL {
        let p = parse_source(src).unwrap();
        let t = typecheck(&p).unwrap();
        assert_eq!(strip_dead_code(&p, &t), p, "{name}");
    }
}

#[test]
fn every_parallel_loop_has_an_access_entry() {
    let p = parse_source(corpus::PR).unwrap();
    let t = typecheck(&p).unwrap();
    let a = analyze_access(&p, &t);
    let mut parallel = 0;
    for f in &p.functions {
        f.body.walk(&mut |s| {
            if matches!(
                s.kind,
                StmtKind::ForAll { parallel: true, .. } | StmtKind::OnAdd { .. } | StmtKind::OnDelete { .. }
            ) {
                parallel += 1;
            }
        });
    }
    assert_eq!(a.loops.len(), parallel);
    assert!(a.loops.iter().any(|l| l.writes.contains("pageRank_nxt")));
}

fn render(kind: &TokenKind) -> String {
    match kind {
        TokenKind::Ident(s) => s.clone(),
        TokenKind::Int(v) => v.to_string(),
        TokenKind::Float(v) => format!("{v:?}"),
        TokenKind::Kw(k) => k.as_str().to_string(),
        TokenKind::Eof => String::new(),
        other => other.symbol().to_string(),
    }
}

fn token_pool() -> Vec<TokenKind> {
    let mut pool: Vec<TokenKind> = "+ - * / % < <= > >= == != && || ! = += -= ++ . , ; : ( ) { } [ ]"
        .split(' ')
        .flat_map(|s| tokenize(s).0)
        .map(|t| t.kind)
        .filter(|k| *k != TokenKind::Eof)
        .collect();
    for w in [
        "forall", "fixedPoint", "Batch", "OnAdd", "if", "else", "return", "int", "propNode",
        "Dynamic", "function", "Incremental",
    ] {
        pool.push(TokenKind::Kw(Keyword::from_word(w).unwrap()));
    }
    pool.push(TokenKind::Ident("x".into()));
    pool.push(TokenKind::Ident("Min".into()));
    pool.push(TokenKind::Int(7));
    pool.push(TokenKind::Float(0.5));
    pool
}

#[derive(Debug, Clone)]
enum Mutation {
    Delete(usize),
    Duplicate(usize),
    Swap(usize, usize),
    Replace(usize, usize),
}

fn mutation() -> impl Strategy<Value = Mutation> {
    let idx = any::<usize>();
    prop_oneof![
        idx.prop_map(Mutation::Delete),
        idx.prop_map(Mutation::Duplicate),
        (idx, any::<usize>()).prop_map(|(a, b)| Mutation::Swap(a, b)),
        (idx, any::<usize>()).prop_map(|(a, b)| Mutation::Replace(a, b)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, ..ProptestConfig::default() })]

    #[test]
    fn mutated_corpus_never_crashes(which in 0usize..3, muts in prop::collection::vec(mutation(), 1..4)) {
        let pool = token_pool();
        let (tokens, _) = tokenize(corpus::ALL[which].1);
        let mut kinds: Vec<TokenKind> = tokens.into_iter().map(|t| t.kind).filter(|k| *k != TokenKind::Eof).collect();
        for m in muts {
            let n = kinds.len().max(1);
            match m {
                Mutation::Delete(i) => { if !kinds.is_empty() { kinds.remove(i % n); } }
                Mutation::Duplicate(i) => { if !kinds.is_empty() { let k = kinds[i % n].clone(); kinds.insert(i % n, k); } }
                Mutation::Swap(a, b) => { if !kinds.is_empty() { kinds.swap(a % n, b % n); } }
                Mutation::Replace(i, j) => { if !kinds.is_empty() { kinds[i % n] = pool[j % pool.len()].clone(); } }
            }
        }
        let text: Vec<String> = kinds.iter().map(render).collect();
        let text = text.join(" ");
        match parse_source(&text) {
            Ok(p) => {
                if let Err(d) = typecheck(&p) {
                    for diag in &d.0 {
                        prop_assert!(diag.span.end() as usize <= text.len());
                        prop_assert!(diag.span.line >= 1);
                    }
                } else {
                    let t = typecheck(&p).unwrap();
                    let _ = analyze_access(&p, &t);
                    let _ = strip_dead_code(&p, &t);
                }
            }
            Err(d) => {
                prop_assert!(!d.0.is_empty());
                for diag in &d.0 {
                    prop_assert!(diag.span.end() as usize <= text.len(), "{diag} beyond {}", text.len());
                    prop_assert!(diag.span.line >= 1);
                }
            }
        }
    }
}
