mod common;

use common::*;
use dfgfold_core::bench::{gen_fir, Bench};
use dfgfold_core::fixed::FixedPointFormat;
use dfgfold_core::graph::{DataflowGraph, OpKind};
use dfgfold_core::pattern::FoldingConfig;
use dfgfold_core::schedule::{
    build_core_graph, factor_cap, folding_delay, list_schedule, verify_schedule, ScheduleReport,
    VertexKind,
};
use rand::Rng;

fn fmt() -> FixedPointFormat {
    FixedPointFormat::default()
}

/// Random graph with per-kind latencies, so every class stays isomorphic.
fn random_timed_graph(r: &mut rand_chacha::ChaCha8Rng) -> DataflowGraph {
    let ops = r.gen_range(2..=6);
    let g = random_graph(
        r,
        ops,
        &[OpKind::Add, OpKind::Mult, OpKind::Sub, OpKind::Delay],
    );
    let mult_lat = r.gen_range(0..=2);
    let add_lat = r.gen_range(0..=1);
    let mut b = g.to_builder();
    for n in &mut b.nodes {
        match n.kind {
            OpKind::Mult => n.latency = mult_lat,
            OpKind::Add => n.latency = add_lat,
            _ => {}
        }
    }
    b.build().unwrap()
}

#[test]
fn list_schedule_matches_exhaustive_minimum() {
    let mut r = rng(5);
    let mut cases = 0;
    while cases < 100 {
        let g = random_timed_graph(&mut r);
        let cfg = kind_config(&g, &[OpKind::Add, OpKind::Mult, OpKind::Sub]);
        let Ok(core) = build_core_graph(&g, &cfg) else {
            continue;
        };
        if core.class_vertices().count() > 6 {
            continue;
        }
        let cap = factor_cap(&core);
        let oracle = exhaustive_min_factor(&core, cap);
        match list_schedule(&core, None) {
            Ok(s) => {
                assert!(verify_schedule(&core, &s).is_empty());
                assert_eq!(
                    Some(s.n),
                    oracle,
                    "{}",
                    dfgfold_core::doc::serialize_graph(&g)
                );
            }
            Err(e) => assert_eq!(oracle, None, "{e}"),
        }
        cases += 1;
    }
}

#[test]
fn every_benchmark_schedule_is_sound() {
    for (_, g, name, cfg) in all_benchmark_configs(fmt()) {
        let core = build_core_graph(&g, &cfg).unwrap();
        let s = list_schedule(&core, None).unwrap();
        assert!(verify_schedule(&core, &s).is_empty(), "{name}");
        for a in &core.arcs {
            assert!(s.delay(a) >= 0, "{name}");
            // zero-delay precedence between scheduled vertices
            let both =
                core.vertices[a.src].class().is_some() && core.vertices[a.dst].class().is_some();
            if a.w == 0 && both {
                assert!(
                    s.slots[a.dst] as i64 - s.slots[a.src] as i64 >= a.p as i64,
                    "{name}"
                );
            }
        }
    }
}

#[test]
fn fir_adder_class_follows_the_chain() {
    let g = Bench::Fir.generate(fmt());
    let cfg = kind_config(&g, &[OpKind::Add]);
    let core = build_core_graph(&g, &cfg).unwrap();
    let s = list_schedule(&core, None).unwrap();
    assert_eq!(s.n, 15);
    let slot = |id: &str| s.slots[core.vertex_of[core.graph.ix(id).unwrap()]];
    for k in 1..15 {
        assert!(slot(&format!("a{:02}", k)) < slot(&format!("a{:02}", k + 1)));
    }
    // four-tap shrink against the exhaustive oracle
    let small = gen_fir(4, &[1, 2, 3, 4]).unwrap();
    let core = build_core_graph(&small, &kind_config(&small, &[OpKind::Add])).unwrap();
    let s = list_schedule(&core, None).unwrap();
    assert_eq!(Some(s.n), exhaustive_min_factor(&core, factor_cap(&core)));
    assert_eq!(s.n, 3);
}

#[test]
fn core_graph_partitions_the_circuit() {
    let g = Bench::Fir.generate(fmt());
    let doc = &Bench::Fir.configs()[6].1; // 14 single taps
    let cfg = dfgfold_core::pattern::resolve_config(&g, doc, None).unwrap();
    let core = build_core_graph(&g, &cfg).unwrap();
    let instances = core
        .vertices
        .iter()
        .filter(|v| matches!(v.kind, VertexKind::Instance { .. }))
        .count();
    assert_eq!(instances, 14);
    // every node of the canonical circuit sits in exactly one vertex
    let mut owner = vec![0usize; core.graph.len()];
    for (v, vx) in core.vertices.iter().enumerate() {
        match &vx.kind {
            VertexKind::Instance { class, instance } => {
                for &n in &core.config.classes[*class].instances[*instance].nodes {
                    owner[n] += 1;
                    assert_eq!(core.vertex_of[n], v);
                }
            }
            VertexKind::Single { node, .. }
            | VertexKind::Input { node }
            | VertexKind::Output { node } => {
                owner[*node] += 1;
            }
        }
    }
    assert!(owner.iter().all(|&c| c == 1));
    // the leftover tap delay became an edge delay; the 14 in instances remain
    assert_eq!(core.graph.count_kind(OpKind::Delay), 14);
}

#[test]
fn pi_feedback_arc_and_report() {
    let g = Bench::Pi.generate(fmt());
    let cfg = dfgfold_core::pattern::resolve_config(&g, &Bench::Pi.configs()[0].1, None).unwrap();
    let core = build_core_graph(&g, &cfg).unwrap();
    assert_eq!(core.class_vertices().count(), 2);
    assert!(core.arcs.iter().any(|a| a.w == 1 && a.src != a.dst));
    let s = list_schedule(&core, None).unwrap();
    let report = ScheduleReport::new(&core, &s);
    let json = serde_json::to_string(&report).unwrap();
    assert!(json.contains("\"N\":2"));
    assert!(report.arcs.iter().all(|a| a.d >= 0));
    let back: ScheduleReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_schedule(&core).unwrap().slots, s.slots);
}

#[test]
fn folding_delay_examples() {
    assert_eq!(folding_delay(0, 0, 0, 1, 2), 1);
    assert_eq!(folding_delay(1, 0, 1, 0, 2), 1);
    assert_eq!(folding_delay(0, 0, 0, 0, 1), 0);
    assert_eq!(folding_delay(0, 2, 0, 1, 3), -1);
}

#[test]
fn identity_partition_runs_at_one() {
    let g = Bench::Iir.generate(fmt());
    let core = build_core_graph(&g, &FoldingConfig::default()).unwrap();
    assert_eq!(list_schedule(&core, None).unwrap().n, 1);
    assert!(list_schedule(&core, Some(3)).is_ok());
}
