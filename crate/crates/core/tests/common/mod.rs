//! Random instance generators and brute-force oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dfgfold_core::bench::Bench;
use dfgfold_core::cost::{ExplorationRow, ParetoPoint};
use dfgfold_core::fixed::FixedPointFormat;
use dfgfold_core::graph::{DataflowGraph, GraphBuilder, Node, OpKind, PortRef};
use dfgfold_core::pattern::{resolve_config, CoreClass, CorePattern, FoldingConfig};
use dfgfold_core::schedule::{verify_schedule, CoreGraph, Schedule, VertexKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const OPS: [OpKind; 5] = [
    OpKind::Add,
    OpKind::Sub,
    OpKind::Mult,
    OpKind::Negate,
    OpKind::Delay,
];

/// A random valid graph with `ops` operators over 1-2 inputs. Operands come
/// from earlier nodes; some edges carry delays and delay nodes may close
/// feedback loops.
pub fn random_graph(rng: &mut ChaCha8Rng, ops: usize, kinds: &[OpKind]) -> DataflowGraph {
    let mut b = GraphBuilder::new("random");
    let inputs = rng.gen_range(1..=2);
    let mut names: Vec<String> = (0..inputs).map(|i| format!("in{i}")).collect();
    for n in &names {
        b.input(n);
    }
    let mut delays = Vec::new();
    for k in 0..ops {
        let kind = *kinds.choose(rng).unwrap();
        let id = format!("n{k:02}");
        b.op(&id, kind);
        let arity = Node::new("x", kind).num_inputs();
        for port in 0..arity {
            let src = names.choose(rng).unwrap().clone();
            let w = if rng.gen_bool(0.2) {
                rng.gen_range(1..=2)
            } else {
                0
            };
            b.connect_delayed(&src, 0, &id, port, w);
        }
        if kind == OpKind::Delay {
            delays.push(id.clone());
        }
        names.push(id);
    }
    // Re-drive some delay nodes from a later node to form loops.
    for d in delays {
        if rng.gen_bool(0.3) {
            let pos = names.iter().position(|n| *n == d).unwrap();
            if pos + 1 < names.len() {
                let src = names[rng.gen_range(pos + 1..names.len())].clone();
                b.edges.retain(|e| e.2 != d);
                b.connect(&src, &d, 0);
            }
        }
    }
    b.output("out", names.last().unwrap());
    b.build().expect("random graph is well formed")
}

/// The induced subgraph of `graph` on a random connected node set of up
/// to `size` operators, as a pattern.
pub fn random_subpattern(
    rng: &mut ChaCha8Rng,
    graph: &DataflowGraph,
    size: usize,
) -> Option<CorePattern> {
    let ops: Vec<usize> = (0..graph.len())
        .filter(|&i| !graph.node(i).kind.is_io())
        .collect();
    let start = *ops.choose(rng)?;
    let mut set = BTreeSet::from([start]);
    while set.len() < size {
        let frontier: Vec<usize> = set
            .iter()
            .flat_map(|&u| {
                graph
                    .in_edges(u)
                    .iter()
                    .map(|&e| graph.edge(e).src.node)
                    .chain(graph.out_edges(u).iter().map(|&e| graph.edge(e).dst.node))
            })
            .filter(|v| !set.contains(v) && !graph.node(*v).kind.is_io())
            .collect();
        let Some(&next) = frontier.choose(rng) else {
            break;
        };
        set.insert(next);
    }
    let mut b = GraphBuilder::new("sub");
    for &u in &set {
        b.add_node(graph.node(u).clone());
    }
    for e in graph.edges() {
        if set.contains(&e.src.node) && set.contains(&e.dst.node) {
            b.connect_delayed(
                graph.id(e.src.node),
                e.src.port,
                graph.id(e.dst.node),
                e.dst.port,
                e.delay,
            );
        }
    }
    CorePattern::new("sub", b.build().ok()?).ok()
}

/// Edge multiset check written independently of the library: the template
/// edges mapped through `map` (with per-node operand swaps) must equal the
/// circuit edges among the image nodes.
pub fn embeds(graph: &DataflowGraph, t: &DataflowGraph, map: &[usize], swap: &[bool]) -> bool {
    for (ti, &gi) in map.iter().enumerate() {
        let (a, b) = (t.node(ti), graph.node(gi));
        if a.kind != b.kind || a.latency != b.latency || a.width != b.width {
            return false;
        }
    }
    let image: BTreeSet<usize> = map.iter().copied().collect();
    let mut want: Vec<_> = t
        .edges()
        .iter()
        .map(|e| {
            let port = if swap[e.dst.node] {
                1 - e.dst.port
            } else {
                e.dst.port
            };
            (map[e.src.node], e.src.port, map[e.dst.node], port, e.delay)
        })
        .collect();
    let mut have: Vec<_> = graph
        .edges()
        .iter()
        .filter(|e| image.contains(&e.src.node) && image.contains(&e.dst.node))
        .map(|e| (e.src.node, e.src.port, e.dst.node, e.dst.port, e.delay))
        .collect();
    want.sort_unstable();
    have.sort_unstable();
    want == have
}

/// Every injective node mapping that embeds the pattern under some operand
/// swap assignment.
pub fn brute_force_matches(graph: &DataflowGraph, pattern: &CorePattern) -> BTreeSet<Vec<usize>> {
    let t = &pattern.template;
    let k = t.len();
    let swappable: Vec<usize> = (0..k)
        .filter(|&i| t.node(i).kind.is_commutative() && t.node(i).num_inputs() == 2)
        .collect();
    let mut out = BTreeSet::new();
    let mut map = Vec::with_capacity(k);
    fn rec(
        graph: &DataflowGraph,
        t: &DataflowGraph,
        swappable: &[usize],
        map: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if map.len() == t.len() {
            for mask in 0u32..(1 << swappable.len()) {
                let mut swap = vec![false; t.len()];
                for (b, &i) in swappable.iter().enumerate() {
                    swap[i] = mask >> b & 1 == 1;
                }
                if embeds(graph, t, map, &swap) {
                    out.insert(map.clone());
                    return;
                }
            }
            return;
        }
        for g in 0..graph.len() {
            if !map.contains(&g) {
                map.push(g);
                rec(graph, t, swappable, map, out);
                map.pop();
            }
        }
    }
    rec(graph, t, &swappable, &mut map, &mut out);
    out
}

/// Smallest factor admitting a valid schedule, by enumerating every slot
/// assignment of the class vertices.
pub fn exhaustive_min_factor(core: &CoreGraph, cap: u32) -> Option<u32> {
    let verts: Vec<usize> = core.class_vertices().collect();
    for n in 1..=cap {
        let mut slots = vec![0u32; core.vertices.len()];
        let total = (n as u64).pow(verts.len() as u32);
        for code in 0..total {
            let mut c = code;
            for &v in &verts {
                slots[v] = (c % n as u64) as u32;
                c /= n as u64;
            }
            let s = Schedule::from_slots(core, n, &slots);
            if verify_schedule(core, &s).is_empty() {
                return Some(n);
            }
        }
    }
    None
}

/// A folding configuration grouping all operators of each listed kind.
pub fn kind_config(graph: &DataflowGraph, kinds: &[OpKind]) -> FoldingConfig {
    let mut classes = Vec::new();
    for &k in kinds {
        let pattern = CorePattern::single(k).unwrap();
        let instances = dfgfold_core::pattern::match_pattern(graph, &pattern);
        if instances.len() >= 2 {
            classes.push(CoreClass { pattern, instances });
        }
    }
    FoldingConfig { classes }
}

/// Indices of non-dominated points, brute force. Identical points keep the
/// one with the smallest (key, index).
pub fn brute_force_front(points: &[ParetoPoint]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    'outer: for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let le = q.lut_units <= p.lut_units && q.latency <= p.latency;
            let lt = q.lut_units < p.lut_units || q.latency < p.latency;
            if le && lt {
                continue 'outer;
            }
            if !lt && le && (q.key.as_str(), j) < (p.key.as_str(), i) {
                continue 'outer;
            }
        }
        out.insert(i);
    }
    out
}

pub fn random_points(rng: &mut ChaCha8Rng, count: usize) -> Vec<ParetoPoint> {
    (0..count)
        .map(|i| ParetoPoint {
            lut_units: rng.gen_range(0..60),
            latency: rng.gen_range(0..60) as f64 * 0.5,
            key: format!("c{}", i % 7),
        })
        .collect()
}

/// Every benchmark with every shipped configuration, resolved.
pub fn all_benchmark_configs(
    fmt: FixedPointFormat,
) -> Vec<(Bench, DataflowGraph, String, FoldingConfig)> {
    let mut out = Vec::new();
    for bench in Bench::ALL {
        let g = bench.generate(fmt);
        for (name, doc) in bench.configs() {
            let cfg = resolve_config(&g, &doc, None).unwrap_or_else(|e| panic!("{name}: {e}"));
            out.push((bench, g.clone(), name, cfg));
        }
    }
    out
}

pub fn front_is_monotone(rows: &[ExplorationRow]) -> bool {
    let mut front: Vec<(f64, u64)> = rows
        .iter()
        .filter(|r| r.pareto)
        .map(|r| {
            (
                r.latency_proxy_ns.unwrap(),
                r.cost.as_ref().unwrap().lut_units,
            )
        })
        .collect();
    front.sort_by(|a, b| a.0.total_cmp(&b.0));
    !front.is_empty() && front.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 > w[1].1)
}

pub fn census_map(g: &DataflowGraph) -> BTreeMap<OpKind, usize> {
    g.census().into_iter().filter(|(k, _)| !k.is_io()).collect()
}

/// Boundary inputs of a config class fed by more than one distinct
/// (source, register count) pair across its instances.
pub fn multi_source_inputs(core: &CoreGraph, s: &Schedule, class: usize) -> usize {
    let g = &core.graph;
    let pattern = &core.config.classes[class].pattern;
    let arc_of = core.arc_of_edge();
    let source = |node: usize| -> String {
        match &core.vertices[core.vertex_of[node]].kind {
            VertexKind::Instance { class, instance } => {
                let inst = &core.config.classes[*class].instances[*instance];
                format!(
                    "unit{class}.{}",
                    inst.nodes.iter().position(|&x| x == node).unwrap()
                )
            }
            _ => g.id(node).to_string(),
        }
    };
    pattern
        .boundary_inputs
        .iter()
        .filter(|bp| {
            let keys: BTreeSet<(String, i64)> = core.config.classes[class]
                .instances
                .iter()
                .map(|inst| {
                    let port = inst.graph_port(bp.node, bp.port);
                    let e = g.driver(PortRef::new(inst.nodes[bp.node], port)).unwrap();
                    let a = &core.arcs[arc_of[&e]];
                    let d = (s.n * a.w) as i64 - a.p as i64 + s.slots[a.dst] as i64
                        - s.slots[a.src] as i64;
                    (source(g.edge(e).src.node), d)
                })
                .collect();
            keys.len() > 1
        })
        .count()
}
