mod common;

use std::collections::BTreeSet;

use common::*;
use dfgfold_core::bench::{gen_pi, Bench};
use dfgfold_core::doc::{parse_graph, serialize_graph};
use dfgfold_core::error::Error;
use dfgfold_core::fixed::FixedPointFormat;
use dfgfold_core::graph::{canonicalize, topo_order, validate, GraphBuilder, OpKind, Violation};
use dfgfold_core::sim::{simulate, Stimuli};

fn fmt() -> FixedPointFormat {
    FixedPointFormat::default()
}

#[test]
fn minimal_document() {
    let g = parse_graph(
        r#"{"name":"wire","nodes":[{"id":"i","kind":"input"},{"id":"o","kind":"output"}],
            "edges":[{"from":["i",0],"to":["o",0]}],"inputs":["i"],"outputs":["o"]}"#,
    )
    .unwrap();
    assert_eq!((g.len(), g.edges().len()), (2, 1));
    assert_eq!(g.edge(0).delay, 0);
}

#[test]
fn pi_document_has_seven_circuit_nodes_plus_gains() {
    let g = parse_graph(&serialize_graph(&gen_pi(fmt(), 0.5, 0.25))).unwrap();
    let census = census_map(&g);
    assert_eq!(census[&OpKind::Mult], 2);
    assert_eq!(census[&OpKind::Add], 2);
    assert_eq!(census[&OpKind::Delay], 1);
    let circuit = g
        .nodes()
        .iter()
        .filter(|n| n.kind != OpKind::ConstInput)
        .count();
    assert_eq!(circuit, 7);
    assert_eq!(g.count_kind(OpKind::ConstInput), 2);
}

#[test]
fn document_errors() {
    let dangling = r#"{"name":"d","nodes":[{"id":"i","kind":"input"},{"id":"o","kind":"output"}],
        "edges":[{"from":["i",0],"to":["nope",0]}],"inputs":["i"],"outputs":["o"]}"#;
    assert!(
        matches!(parse_graph(dangling), Err(Error::DanglingReference(_))),
        "{:?}",
        parse_graph(dangling)
    );
    let err = parse_graph("{\"name\": \"x\",\n  \"nodes\": [,]}").unwrap_err();
    assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err}");
    let double = r#"{"name":"d","nodes":[{"id":"a","kind":"input"},{"id":"b","kind":"input"},{"id":"o","kind":"output"}],
        "edges":[{"from":["a",0],"to":["o",0]},{"from":["b",0],"to":["o",0]}],"inputs":["a","b"],"outputs":["o"]}"#;
    assert!(parse_graph(double).is_err());
}

#[test]
fn round_trip_on_benchmarks_and_random_graphs() {
    for b in Bench::ALL {
        let g = b.generate(fmt());
        let text = serialize_graph(&g);
        assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);
    }
    let mut r = rng(2);
    for _ in 0..50 {
        let g = random_graph(&mut r, 8, &OPS);
        let text = serialize_graph(&g);
        assert_eq!(serialize_graph(&parse_graph(&text).unwrap()), text);
    }
}

#[test]
fn validate_reports_loops_and_open_ports() {
    let mut b = GraphBuilder::new("loop");
    b.input("x")
        .binary("a1", OpKind::Add, "x", "a3")
        .binary("a2", OpKind::Add, "a1", "x")
        .binary("a3", OpKind::Add, "a2", "x")
        .output("y", "a3");
    let g = b.build().unwrap();
    assert!(validate(&g)
        .iter()
        .any(|v| matches!(v, Violation::ZeroDelayCycle { .. })));
    let mut b = GraphBuilder::new("open");
    b.input("x")
        .op("a", OpKind::Add)
        .connect("x", "a", 0)
        .output("y", "a");
    let g = b.build().unwrap();
    assert!(validate(&g)
        .iter()
        .any(|v| matches!(v, Violation::Unconnected { .. })));
    assert!(validate(&Bench::Fir.generate(fmt())).is_empty());
}

#[test]
fn canonicalize_folds_delay_chains() {
    let mut b = GraphBuilder::new("chain");
    b.input("a")
        .unary("d1", OpKind::Delay, "a")
        .unary("d2", OpKind::Delay, "d1")
        .unary("n", OpKind::Negate, "d2")
        .output("b", "n");
    let g = b.build().unwrap();
    let c = canonicalize(&g, &BTreeSet::new());
    assert_eq!(c.count_kind(OpKind::Delay), 0);
    let n = c.ix("n").unwrap();
    assert_eq!(c.edge(c.in_edges(n)[0]).delay, 2);
    let kept = canonicalize(&g, &BTreeSet::from(["d1".to_string(), "d2".to_string()]));
    assert_eq!(serialize_graph(&kept), serialize_graph(&g));
}

#[test]
fn canonicalize_preserves_traces() {
    let pi = gen_pi(fmt(), 0.5, 0.25);
    let c = canonicalize(&pi, &BTreeSet::new());
    let add1 = c.ix("add1").unwrap();
    assert!(c
        .in_edges(add1)
        .iter()
        .any(|&e| c.edge(e).delay == 1 && c.id(c.edge(e).src.node) == "add2"));
    let mut graphs = vec![pi];
    graphs.extend(Bench::ALL.iter().map(|b| b.generate(fmt())));
    let mut r = rng(9);
    graphs.extend((0..20).map(|_| random_graph(&mut r, 9, &OPS)));
    for g in graphs {
        let c = canonicalize(&g, &BTreeSet::new());
        let s = Stimuli::random(&g, fmt(), 100, 4);
        assert_eq!(
            simulate(&g, &s, 100, fmt()).unwrap(),
            simulate(&c, &s, 100, fmt()).unwrap()
        );
    }
}

#[test]
fn topo_order_rules() {
    let mut b = GraphBuilder::new("chain");
    b.input("in")
        .binary("mult", OpKind::Mult, "in", "in")
        .binary("add", OpKind::Add, "mult", "in")
        .output("out", "add");
    let g = b.build().unwrap();
    let ids: Vec<&str> = topo_order(&g)
        .unwrap()
        .into_iter()
        .map(|i| g.id(i))
        .collect();
    assert_eq!(ids, ["in", "mult", "add", "out"]);

    let mut b = GraphBuilder::new("diamond");
    b.input("a")
        .unary("c", OpKind::Negate, "a")
        .unary("b", OpKind::Negate, "a")
        .binary("d", OpKind::Add, "b", "c")
        .output("y", "d");
    let g = b.build().unwrap();
    let ids: Vec<&str> = topo_order(&g)
        .unwrap()
        .into_iter()
        .map(|i| g.id(i))
        .collect();
    assert_eq!(ids, ["a", "b", "c", "d", "y"]);

    // feedback through a register still orders
    assert!(topo_order(&gen_pi(fmt(), 0.5, 0.25)).is_ok());
    let mut r = rng(3);
    for _ in 0..50 {
        let g = random_graph(&mut r, 9, &OPS);
        let order = topo_order(&g).unwrap();
        let mut pos = vec![0; g.len()];
        for (i, &n) in order.iter().enumerate() {
            pos[n] = i;
        }
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..g.len()).collect::<Vec<_>>());
        for (e, edge) in g.edges().iter().enumerate() {
            if g.is_combinational(e) {
                assert!(pos[edge.src.node] < pos[edge.dst.node]);
            }
        }
    }
}
