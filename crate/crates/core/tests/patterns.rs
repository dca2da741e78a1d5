mod common;

use std::collections::BTreeSet;

use common::*;
use dfgfold_core::bench::{gen_fir, gen_pi, patterns, Bench};
use dfgfold_core::error::Error;
use dfgfold_core::fixed::FixedPointFormat;
use dfgfold_core::graph::{DataflowGraph, GraphBuilder, OpKind};
use dfgfold_core::pattern::{
    check_config, match_pattern, select_cover, select_cover_exact, ConfigViolation, CoreClass,
    FoldingConfig,
};

fn fmt() -> FixedPointFormat {
    FixedPointFormat::default()
}

#[test]
fn matcher_agrees_with_brute_force_on_random_graphs() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 100 {
        let ops = rand::Rng::gen_range(&mut r, 3..=9);
        let g = random_graph(&mut r, ops, &OPS);
        assert!(g.len() <= 12);
        let size = rand::Rng::gen_range(&mut r, 1..=3);
        let Some(p) = random_subpattern(&mut r, &g, size) else {
            continue;
        };
        let found = match_pattern(&g, &p);
        let got: BTreeSet<Vec<usize>> = found.iter().map(|i| i.nodes.clone()).collect();
        assert_eq!(got.len(), found.len(), "duplicate embeddings");
        assert_eq!(
            got,
            brute_force_matches(&g, &p),
            "graph {:?}",
            dfgfold_core::doc::serialize_graph(&g)
        );
        assert!(!got.is_empty());
        checked += 1;
    }
}

#[test]
fn fir16_single_mult_has_sixteen_instances() {
    let g = Bench::Fir.generate(fmt());
    assert_eq!(match_pattern(&g, &patterns::single(OpKind::Mult)).len(), 16);
}

#[test]
fn fir4_mult_add_overlaps_and_covers_three() {
    let g = gen_fir(4, &[1, 2, 3, 4]).unwrap();
    let p = patterns::mult_add();
    // m00 feeds a01 on port 0, so a port-1 pattern needs the swap
    let found = match_pattern(&g, &p);
    assert_eq!(found.len(), 4, "{found:?}");
    let pairs: BTreeSet<(String, String)> = found
        .iter()
        .map(|i| (g.id(i.nodes[1]).to_string(), g.id(i.nodes[0]).to_string()))
        .collect();
    assert_eq!(brute_force_matches(&g, &p).len(), 4);
    let expected: BTreeSet<(String, String)> = [
        ("m00", "a01"),
        ("m01", "a01"),
        ("m02", "a02"),
        ("m03", "a03"),
    ]
    .into_iter()
    .map(|(m, a)| (m.to_string(), a.to_string()))
    .collect();
    assert_eq!(pairs, expected);
    // adders bound the disjoint selection at three
    let cfg = select_cover(&[(p.clone(), found.clone())], &[3]).unwrap();
    assert!(check_config(&g, &cfg).is_empty());
    assert!(matches!(
        select_cover(&[(p.clone(), found.clone())], &[4]),
        Err(Error::InfeasibleCount { requested: 4, .. })
    ));
    assert!(select_cover_exact(&g, &[(p, found)], &[4]).is_none());
}

#[test]
fn pi_mult_add_has_two_disjoint_instances() {
    let g = gen_pi(fmt(), 0.5, 0.25);
    let p = patterns::mult_add();
    let found = match_pattern(&g, &p);
    assert_eq!(found.len(), 2);
    let cfg = select_cover(&[(p, found)], &[2]).unwrap();
    assert!(check_config(&g, &cfg).is_empty());
}

#[test]
fn too_many_instances_is_infeasible() {
    let g = Bench::Fir.generate(fmt());
    let p = patterns::single(OpKind::Mult);
    let err = select_cover(&[(p.clone(), match_pattern(&g, &p))], &[17]).unwrap_err();
    assert!(
        matches!(
            err,
            Error::InfeasibleCount {
                class: 0,
                requested: 17,
                found: 16,
                ..
            }
        ),
        "{err}"
    );
}

#[test]
fn check_config_flags_overlap_and_shape() {
    let g = gen_pi(fmt(), 0.5, 0.25);
    let mult = patterns::single(OpKind::Mult);
    let ma = patterns::mult_add();
    let mults = match_pattern(&g, &mult);
    let mas = match_pattern(&g, &ma);
    let overlap = FoldingConfig {
        classes: vec![
            CoreClass {
                pattern: mult.clone(),
                instances: mults.clone(),
            },
            CoreClass {
                pattern: ma.clone(),
                instances: mas.clone(),
            },
        ],
    };
    assert!(check_config(&g, &overlap)
        .iter()
        .any(|v| matches!(v, ConfigViolation::Overlap { .. })));
    // a mult-sub shape bound to a mult-add class
    let mut b = GraphBuilder::new("mixed");
    b.input("x")
        .binary("m1", OpKind::Mult, "x", "x")
        .binary("a", OpKind::Add, "m1", "x")
        .binary("m2", OpKind::Mult, "x", "x")
        .binary("s", OpKind::Sub, "m2", "x")
        .output("y", "a")
        .output("z", "s");
    let h = b.build().unwrap();
    let mut inst = match_pattern(&h, &ma);
    assert_eq!(inst.len(), 1);
    let mut bad = inst[0].clone();
    bad.nodes = vec![h.ix("m2").unwrap(), h.ix("s").unwrap()];
    inst.push(bad);
    let cfg = FoldingConfig {
        classes: vec![CoreClass {
            pattern: ma,
            instances: inst,
        }],
    };
    assert!(check_config(&h, &cfg)
        .iter()
        .any(|v| matches!(v, ConfigViolation::NotIsomorphic { .. })));
}

#[test]
fn every_returned_instance_passes_check_config() {
    for bench in Bench::ALL {
        let g = bench.generate(fmt());
        for p in [
            patterns::mult_add(),
            patterns::sub_mult(),
            patterns::fir_taps(2),
            patterns::pid_i(),
        ] {
            for inst in match_pattern(&g, &p) {
                let cfg = FoldingConfig {
                    classes: vec![CoreClass {
                        pattern: p.clone(),
                        instances: vec![inst],
                    }],
                };
                assert!(check_config(&g, &cfg).is_empty());
            }
        }
    }
}

fn relabel(g: &DataflowGraph, f: impl Fn(&str) -> String) -> DataflowGraph {
    let mut b = g.to_builder();
    for n in &mut b.nodes {
        n.id = f(&n.id);
    }
    for e in &mut b.edges {
        e.0 = f(&e.0);
        e.2 = f(&e.2);
    }
    b.inputs = b.inputs.iter().map(|s| f(s)).collect();
    b.outputs = b.outputs.iter().map(|s| f(s)).collect();
    b.build().unwrap()
}

#[test]
fn cover_is_invariant_under_order_preserving_relabeling() {
    let g = Bench::Fir.generate(fmt());
    let h = relabel(&g, |s| format!("q_{s}"));
    let p = patterns::fir_taps(2);
    let pick = |g: &DataflowGraph| -> Vec<BTreeSet<String>> {
        let cfg = select_cover(&[(p.clone(), match_pattern(g, &p))], &[7]).unwrap();
        cfg.classes[0]
            .instances
            .iter()
            .map(|i| {
                i.nodes
                    .iter()
                    .map(|&n| g.id(n).trim_start_matches("q_").to_string())
                    .collect()
            })
            .collect()
    };
    assert_eq!(pick(&g), pick(&h));
}

#[test]
fn table_one_counts_are_achievable() {
    let g = Bench::Fir.generate(fmt());
    let p = patterns::fir_taps(1);
    assert!(select_cover(&[(p.clone(), match_pattern(&g, &p))], &[14]).is_ok());
    let t = Bench::Tpid.generate(fmt());
    let pid = patterns::pid();
    assert!(select_cover(&[(pid.clone(), match_pattern(&t, &pid))], &[3]).is_ok());
    for (_, _, name, cfg) in all_benchmark_configs(fmt()) {
        assert!(
            cfg.classes.iter().all(|c| !c.instances.is_empty()),
            "{name}"
        );
    }
}
