use graphdyn_core::generate::{gen_updates, uniform, GenOptions};
use graphdyn_core::{DynamicGraph, GraphOptions, UpdateRecord, UpdateStream};
use graphdyn_dsl::{compile, corpus};
use graphdyn_engine::{run_program, ExecOptions, Inputs, Topology, Value};
use graphdyn_partition::PartitionedGraph;
use proptest::prelude::*;

fn graph(edges: &[(u32, u32, i32)], n: usize, directed: bool, merge: usize) -> DynamicGraph {
    let opts = GraphOptions {
        directed,
        reverse: true,
        merge_interval: merge,
        ..GraphOptions::default()
    };
    DynamicGraph::build_csr(edges, n, opts).unwrap()
}

fn sorted(mut e: Vec<(u32, u32, i32)>) -> Vec<(u32, u32, i32)> {
    e.sort_unstable();
    e
}

fn opts() -> ExecOptions {
    ExecOptions {
        worker_count: 2,
        check_contention: true,
        ..ExecOptions::default()
    }
}

fn values<G>(out: &graphdyn_engine::RunOutput<G>, name: &str) -> Vec<Value> {
    out.node_props[name].values.clone()
}

#[test]
fn programs_give_the_same_results_on_any_rank_count() {
    let gen = |undirected| GenOptions {
        max_weight: 25,
        simple: true,
        undirected,
        seed: 5,
    };
    let directed = uniform(200, 900, gen(false));
    let undirected = uniform(90, 500, gen(true));
    let d_stream = gen_updates(&directed, false, 10.0, 0.5, 11).unwrap();
    let u_stream = gen_updates(&undirected, true, 20.0, 0.5, 12).unwrap();

    let sssp_in = Inputs::new()
        .with("src", 0)
        .with("batchSize", 17)
        .with_updates(d_stream.clone());
    let pr_in = Inputs::new()
        .with("batchSize", 17)
        .with("beta", 1e-10)
        .with("damping", 0.85)
        .with("maxIter", 500)
        .with_updates(d_stream);
    let tc_in = Inputs::new().with("batchSize", 9).with_updates(u_stream);
    let sssp = compile(corpus::SSSP).unwrap();
    let pr = compile(corpus::PR).unwrap();
    let tc = compile(corpus::TC).unwrap();

    let dg = || graph(&directed.edges, directed.node_count, true, 2);
    let ug = || graph(&undirected.edges, undirected.node_count, false, 3);
    let base_sssp = run_program(&sssp, dg(), &sssp_in, &opts()).unwrap();
    let base_pr = run_program(&pr, dg(), &pr_in, &opts()).unwrap();
    let base_tc = run_program(&tc, ug(), &tc_in, &opts()).unwrap();

    for ranks in [1, 2, 4, 8] {
        let out = run_program(&sssp, PartitionedGraph::partition(&dg(), ranks).unwrap(), &sssp_in, &opts()).unwrap();
        assert_eq!(values(&out, "dist"), values(&base_sssp, "dist"), "sssp on {ranks} ranks");
        assert_eq!(values(&out, "parent"), values(&base_sssp, "parent"));
        assert_eq!(sorted(out.graph.edges()), sorted(base_sssp.graph.edges()));
        assert_eq!(out.graph.live_edge_count(), base_sssp.graph.live_edge_count());
        let comm = out.graph.comm().total();
        if ranks == 1 {
            assert!(comm.is_zero(), "{comm:?}");
        } else {
            assert!(comm.remote_reads > 0);
        }

        let out = run_program(&pr, PartitionedGraph::partition(&dg(), ranks).unwrap(), &pr_in, &opts()).unwrap();
        for (a, b) in values(&out, "pageRank").iter().zip(values(&base_pr, "pageRank")) {
            assert!((a.as_f64() - b.as_f64()).abs() < 1e-6, "pr on {ranks} ranks");
        }

        let out = run_program(&tc, PartitionedGraph::partition(&ug(), ranks).unwrap(), &tc_in, &opts()).unwrap();
        assert_eq!(out.returned, base_tc.returned, "tc on {ranks} ranks");
        assert_eq!(sorted(out.graph.edges()), sorted(base_tc.graph.edges()));
        if ranks == 1 {
            assert!(out.graph.comm().total().is_zero());
        }
    }
}

#[test]
fn thousand_update_batch_matches_replay() {
    let list = uniform(
        500,
        4000,
        GenOptions {
            seed: 3,
            ..GenOptions::default()
        },
    );
    let stream = gen_updates(&list, false, 25.0, 0.5, 4).unwrap();
    assert_eq!(stream.len(), 1000);
    for directed in [true, false] {
        let mut g = graph(&list.edges, list.node_count, directed, 1);
        let mut pg = PartitionedGraph::partition(&g, 4).unwrap();
        pg.apply_batch_partitioned(stream.records()).unwrap();
        g.update_csr_del(stream.records()).unwrap();
        g.update_csr_add(stream.records()).unwrap();
        g.finish_batch();
        assert_eq!(sorted(pg.edges()), sorted(g.edges()));
        assert_eq!(pg.live_edge_count(), g.live_edge_count());
    }
}

fn record() -> impl Strategy<Value = UpdateRecord> {
    (0..24u32, 0..24u32, 1..9i32, any::<bool>()).prop_map(|(u, v, w, add)| {
        if add {
            UpdateRecord::add(u, v, w)
        } else {
            UpdateRecord::delete(u, v)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shard_union_tracks_the_global_graph(
        edges in prop::collection::vec((0..24u32, 0..24u32, 1..9i32), 0..60),
        batches in prop::collection::vec(prop::collection::vec(record(), 0..12), 1..6),
        ranks in 1..6usize,
        directed in any::<bool>(),
        merge in 1..3usize,
    ) {
        let mut g = graph(&edges, 24, directed, merge);
        let mut pg = PartitionedGraph::partition(&g, ranks).unwrap();
        for batch in &batches {
            let stream = UpdateStream::new(batch.clone());
            let dr = pg.update_csr_del(stream.records()).unwrap();
            let ar = pg.update_csr_add(stream.records()).unwrap();
            let gd = g.update_csr_del(stream.records()).unwrap();
            let ga = g.update_csr_add(stream.records()).unwrap();
            prop_assert_eq!(dr.applied, gd.applied);
            prop_assert_eq!(dr.freed.len(), gd.freed.len());
            prop_assert_eq!(ar.claimed.len(), ga.claimed.len());
            let slots = pg.edge_slot_count();
            prop_assert!(ar.claimed.iter().all(|&s| s < slots));
            pg.finish_batch();
            g.finish_batch();
            prop_assert_eq!(sorted(pg.edges()), sorted(g.edges()));
            prop_assert_eq!(pg.live_edge_count(), g.live_edge_count());
            for v in 0..24 {
                let mut a: Vec<u32> = pg.out_edges(None, v).map(|e| e.target).collect();
                let mut b: Vec<u32> = g.neighbors(v).map(|e| e.target).collect();
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
                let mut a: Vec<u32> = pg.in_edges(None, v).unwrap().map(|e| e.source).collect();
                let mut b: Vec<u32> = g.nodes_to(v).unwrap().map(|e| e.source).collect();
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }
        if ranks == 1 {
            prop_assert!(pg.comm().total().is_zero());
        }
    }
}
