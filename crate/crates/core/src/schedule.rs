//! Core graphs and time-slot scheduling under the folding equation.
//!
//! Each config instance and each remaining operator is a vertex bound to a
//! class (one shared unit per class). A schedule assigns every class vertex
//! a slot `u` in `[0, N)`; an arc from `U` to `V` with `w` edge delays and
//! producer latency `P` then needs `D = N*w - P + v - u >= 0` registers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonicalize, topo_order, DataflowGraph, NodeIx, OpKind};
use crate::pattern::{CoreClass, CoreInstance, FoldingConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertexKind {
    /// Instance `instance` of config class `class`.
    Instance {
        class: usize,
        instance: usize,
    },
    /// An operator outside every config class; its own class.
    Single {
        class: usize,
        node: NodeIx,
    },
    Input {
        node: NodeIx,
    },
    Output {
        node: NodeIx,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub name: String,
    pub kind: VertexKind,
    /// Cycles from sampling the inputs to a valid result.
    pub latency: u32,
}

impl Vertex {
    pub fn class(&self) -> Option<usize> {
        match self.kind {
            VertexKind::Instance { class, .. } | VertexKind::Single { class, .. } => Some(class),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoreArc {
    pub src: usize,
    pub dst: usize,
    /// Edge delay `w_e`.
    pub w: u32,
    /// Producer latency `P_u`.
    pub p: u32,
    /// Edge index in the canonical graph.
    pub edge: usize,
}

/// Vertices and arcs of a circuit partitioned by a folding config.
#[derive(Clone, Debug)]
pub struct CoreGraph {
    /// Canonical circuit: delays outside config instances folded into edges.
    pub graph: DataflowGraph,
    /// The config, re-indexed onto `graph`.
    pub config: FoldingConfig,
    pub vertices: Vec<Vertex>,
    pub arcs: Vec<CoreArc>,
    /// Class id -> member vertices. Config classes come first, then one
    /// singleton class per remaining operator.
    pub classes: Vec<Vec<usize>>,
    /// Circuit node -> vertex.
    pub vertex_of: Vec<usize>,
    /// Register bits of the original circuit outside config instances:
    /// unprotected delay nodes and edge delays not internal to an instance.
    pub outside_reg_bits: u64,
}

impl CoreGraph {
    pub fn num_config_classes(&self) -> usize {
        self.config.classes.len()
    }

    pub fn class_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertices.len()).filter(|&v| self.vertices[v].class().is_some())
    }

    /// Template node `t` of the vertex's class and the instance mapping.
    pub fn instance(&self, v: usize) -> Option<(&CoreClass, &CoreInstance)> {
        match self.vertices[v].kind {
            VertexKind::Instance { class, instance } => {
                let c = &self.config.classes[class];
                Some((c, &c.instances[instance]))
            }
            _ => None,
        }
    }

    /// Arc index by canonical edge index.
    pub fn arc_of_edge(&self) -> BTreeMap<usize, usize> {
        self.arcs
            .iter()
            .enumerate()
            .map(|(i, a)| (a.edge, i))
            .collect()
    }

    /// Whether a zero-register arc is a same-cycle path through the
    /// folded datapath.
    fn combinational(&self, a: &CoreArc) -> bool {
        a.p == 0
            && self.vertices[a.src].class().is_some()
            && self.vertices[a.dst].class().is_some()
            && self.graph.node(self.graph.edge(a.edge).dst.node).kind != OpKind::Delay
    }
}

/// Longest latency path through a template, in cycles.
fn template_latency(t: &DataflowGraph) -> u32 {
    let order = topo_order(t).expect("pattern templates are acyclic");
    let mut best = vec![0u32; t.len()];
    let mut max = 0;
    for &u in &order {
        let mut start = 0;
        for &e in t.in_edges(u) {
            if t.is_combinational(e) {
                start = start.max(best[t.edge(e).src.node]);
            }
        }
        best[u] = start + t.node(u).latency;
        max = max.max(best[u]);
    }
    max
}

/// Partition the circuit into vertices and collect the arcs between them.
///
/// Delays outside config instances are first rewritten into edge delays,
/// so arc weights are accumulated path delays.
pub fn build_core_graph(graph: &DataflowGraph, config: &FoldingConfig) -> Result<CoreGraph> {
    let protected: BTreeSet<String> = config
        .classes
        .iter()
        .flat_map(|c| c.instances.iter().flat_map(|i| i.nodes.iter()))
        .map(|&n| graph.id(n).to_string())
        .collect();
    let owner: BTreeMap<NodeIx, (usize, usize)> = config
        .classes
        .iter()
        .enumerate()
        .flat_map(|(k, c)| {
            c.instances
                .iter()
                .enumerate()
                .flat_map(move |(i, inst)| inst.nodes.iter().map(move |&n| (n, (k, i))))
        })
        .collect();
    let outside_reg_bits = graph
        .nodes()
        .iter()
        .enumerate()
        .filter(|(n, node)| node.kind == OpKind::Delay && !owner.contains_key(n))
        .map(|(_, node)| node.width as u64)
        .sum::<u64>()
        + graph
            .edges()
            .iter()
            .filter(|e| e.delay > 0)
            .filter(|e| {
                let (a, b) = (owner.get(&e.src.node), owner.get(&e.dst.node));
                a.is_none() || a != b
            })
            .map(|e| e.delay as u64 * graph.node(e.src.node).width as u64)
            .sum::<u64>();
    let canon = canonicalize(graph, &protected);
    let remap = |n: NodeIx| canon.ix(graph.id(n)).expect("protected nodes survive");
    let config = FoldingConfig {
        classes: config
            .classes
            .iter()
            .map(|c| CoreClass {
                pattern: c.pattern.clone(),
                instances: c
                    .instances
                    .iter()
                    .map(|i| CoreInstance {
                        nodes: i.nodes.iter().map(|&n| remap(n)).collect(),
                        swapped: i.swapped.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };

    let mut vertices = Vec::new();
    let mut vertex_of = vec![usize::MAX; canon.len()];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, class) in config.classes.iter().enumerate() {
        let p = template_latency(&class.pattern.template);
        let mut members = Vec::new();
        for (i, inst) in class.instances.iter().enumerate() {
            let v = vertices.len();
            vertices.push(Vertex {
                name: format!("core{k}#{i}"),
                kind: VertexKind::Instance {
                    class: k,
                    instance: i,
                },
                latency: p,
            });
            for &n in &inst.nodes {
                vertex_of[n] = v;
            }
            members.push(v);
        }
        classes.push(members);
    }
    for (n, node) in canon.nodes().iter().enumerate() {
        if vertex_of[n] != usize::MAX {
            continue;
        }
        let kind = match node.kind {
            OpKind::Input | OpKind::ConstInput => VertexKind::Input { node: n },
            OpKind::Output => VertexKind::Output { node: n },
            _ => {
                classes.push(Vec::new());
                VertexKind::Single {
                    class: classes.len() - 1,
                    node: n,
                }
            }
        };
        let v = vertices.len();
        if let VertexKind::Single { class, .. } = kind {
            classes[class].push(v);
        }
        vertices.push(Vertex {
            name: node.id.clone(),
            kind,
            latency: match kind {
                VertexKind::Single { .. } => node.latency,
                _ => 0,
            },
        });
        vertex_of[n] = v;
    }

    // Template edges stay inside their unit; everything else is an arc.
    let mut internal = BTreeSet::new();
    for class in &config.classes {
        let t = &class.pattern.template;
        for inst in &class.instances {
            for e in t.edges() {
                internal.insert((
                    inst.nodes[e.src.node],
                    e.src.port,
                    inst.nodes[e.dst.node],
                    inst.graph_port(e.dst.node, e.dst.port),
                ));
            }
        }
    }
    let mut arcs = Vec::new();
    for (i, e) in canon.edges().iter().enumerate() {
        if internal.contains(&(e.src.node, e.src.port, e.dst.node, e.dst.port)) {
            continue;
        }
        let src = vertex_of[e.src.node];
        arcs.push(CoreArc {
            src,
            dst: vertex_of[e.dst.node],
            w: e.delay,
            p: vertices[src].latency,
            edge: i,
        });
    }
    Ok(CoreGraph {
        graph: canon,
        config,
        vertices,
        arcs,
        classes,
        vertex_of,
        outside_reg_bits,
    })
}

/// `D = N*w - P + v - u`.
pub fn folding_delay(w: u32, p: u32, u: u32, v: u32, n: u32) -> i64 {
    n as i64 * w as i64 - p as i64 + v as i64 - u as i64
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub n: u32,
    /// Slot per vertex. Inputs sit at 0; outputs at `latency_offset`.
    pub slots: Vec<u32>,
    /// Cycles from the start of an input frame to the matching outputs.
    pub latency_offset: u32,
}

impl Schedule {
    /// Complete a slot assignment of the class vertices: inputs at 0 and
    /// outputs at the smallest offset that keeps their arcs non-negative.
    pub fn from_slots(core: &CoreGraph, n: u32, class_slots: &[u32]) -> Schedule {
        let mut slots = class_slots.to_vec();
        slots.resize(core.vertices.len(), 0);
        for (v, vx) in core.vertices.iter().enumerate() {
            if vx.class().is_none() {
                slots[v] = 0;
            }
        }
        let mut offset = 0i64;
        for a in &core.arcs {
            if matches!(core.vertices[a.dst].kind, VertexKind::Output { .. }) {
                offset = offset.max(-folding_delay(a.w, a.p, slots[a.src], 0, n));
            }
        }
        let offset = offset as u32;
        for (v, vx) in core.vertices.iter().enumerate() {
            if matches!(vx.kind, VertexKind::Output { .. }) {
                slots[v] = offset;
            }
        }
        Schedule {
            n,
            slots,
            latency_offset: offset,
        }
    }

    pub fn delay(&self, a: &CoreArc) -> i64 {
        folding_delay(a.w, a.p, self.slots[a.src], self.slots[a.dst], self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleViolation {
    SlotOutOfRange {
        vertex: String,
        slot: u32,
        n: u32,
    },
    Resource {
        class: usize,
        slot: u32,
        first: String,
        second: String,
    },
    NegativeDelay {
        src: String,
        dst: String,
        d: i64,
    },
    /// Zero-register arcs would close a same-cycle loop through the
    /// shared units of these classes.
    CombinationalLoop {
        classes: Vec<usize>,
    },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::SlotOutOfRange { vertex, slot, n } => {
                write!(f, "{vertex} at slot {slot} is outside [0, {n})")
            }
            ScheduleViolation::Resource {
                class,
                slot,
                first,
                second,
            } => write!(
                f,
                "class {class} slot {slot} used by both {first} and {second}"
            ),
            ScheduleViolation::NegativeDelay { src, dst, d } => {
                write!(f, "arc {src} -> {dst} needs {d} registers")
            }
            ScheduleViolation::CombinationalLoop { classes } => {
                write!(f, "same-cycle loop through classes {classes:?}")
            }
        }
    }
}

/// Class-level same-cycle dependencies.
#[derive(Clone, Debug, Default)]
struct CombGraph {
    succ: BTreeMap<usize, BTreeSet<usize>>,
}

impl CombGraph {
    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(c) = stack.pop() {
            if c == to {
                return true;
            }
            if seen.insert(c) {
                if let Some(s) = self.succ.get(&c) {
                    stack.extend(s.iter().copied());
                }
            }
        }
        false
    }

    /// Whether adding `a -> b` closes a loop.
    fn closes_loop(&self, a: usize, b: usize) -> bool {
        a == b || self.reaches(b, a)
    }

    fn add(&mut self, a: usize, b: usize) {
        self.succ.entry(a).or_default().insert(b);
    }

    /// Classes along one loop, if any.
    fn find_loop(&self) -> Option<Vec<usize>> {
        for (&a, succ) in &self.succ {
            for &b in succ {
                if a == b {
                    return Some(vec![a]);
                }
                if self.reaches(b, a) {
                    return Some(vec![a, b]);
                }
            }
        }
        None
    }
}

/// Check slot ranges, class occupancy and `D >= 0` on every arc.
pub fn verify_schedule(core: &CoreGraph, s: &Schedule) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let n = s.n;
    if n == 0 || s.slots.len() != core.vertices.len() {
        out.push(ScheduleViolation::SlotOutOfRange {
            vertex: "<schedule>".into(),
            slot: 0,
            n,
        });
        return out;
    }
    for (k, members) in core.classes.iter().enumerate() {
        let mut owner: Vec<Option<usize>> = vec![None; n as usize];
        for &v in members {
            let u = s.slots[v];
            if u >= n {
                out.push(ScheduleViolation::SlotOutOfRange {
                    vertex: core.vertices[v].name.clone(),
                    slot: u,
                    n,
                });
                continue;
            }
            let occ = core.vertices[v].latency.max(1);
            for j in 0..occ {
                let slot = (u + j) % n;
                match owner[slot as usize] {
                    Some(prev) => out.push(ScheduleViolation::Resource {
                        class: k,
                        slot,
                        first: core.vertices[prev].name.clone(),
                        second: core.vertices[v].name.clone(),
                    }),
                    None => owner[slot as usize] = Some(v),
                }
            }
        }
    }
    let mut comb = CombGraph::default();
    for a in &core.arcs {
        let d = s.delay(a);
        if d < 0 {
            out.push(ScheduleViolation::NegativeDelay {
                src: core.vertices[a.src].name.clone(),
                dst: core.vertices[a.dst].name.clone(),
                d,
            });
        } else if d == 0 && core.combinational(a) {
            comb.add(
                core.vertices[a.src].class().unwrap(),
                core.vertices[a.dst].class().unwrap(),
            );
        }
    }
    if let Some(classes) = comb.find_loop() {
        out.push(ScheduleViolation::CombinationalLoop { classes });
    }
    out
}

/// Priority: longest chain of zero-delay arcs to a sink, each vertex
/// weighted by its occupancy.
fn priorities(core: &CoreGraph) -> Result<Vec<u64>> {
    let nv = core.vertices.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut indeg = vec![0usize; nv];
    for a in &core.arcs {
        if a.w == 0
            && a.src != a.dst
            && core.vertices[a.src].class().is_some()
            && core.vertices[a.dst].class().is_some()
        {
            succ[a.src].push(a.dst);
            indeg[a.dst] += 1;
        }
    }
    let mut order = Vec::with_capacity(nv);
    let mut ready: Vec<usize> = (0..nv).filter(|&v| indeg[v] == 0).collect();
    while let Some(v) = ready.pop() {
        order.push(v);
        for &s in &succ[v] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.push(s);
            }
        }
    }
    if order.len() != nv {
        let stuck: Vec<String> = (0..nv)
            .filter(|&v| indeg[v] > 0)
            .map(|v| core.vertices[v].name.clone())
            .collect();
        return Err(Error::CyclicCoreGraph(stuck));
    }
    let mut prio = vec![0u64; nv];
    for &v in order.iter().rev() {
        let tail = succ[v].iter().map(|&s| prio[s]).max().unwrap_or(0);
        prio[v] = core.vertices[v].latency.max(1) as u64 + tail;
    }
    Ok(prio)
}

/// List scheduling at a fixed folding factor.
fn try_list(core: &CoreGraph, n: u32, prio: &[u64]) -> Option<Vec<u32>> {
    let nv = core.vertices.len();
    let mut slot: Vec<Option<u32>> = vec![None; nv];
    let mut in_arcs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, a) in core.arcs.iter().enumerate() {
        in_arcs[a.dst].push(i);
        out_arcs[a.src].push(i);
    }
    let mut busy: Vec<Vec<bool>> = core
        .classes
        .iter()
        .map(|_| vec![false; n as usize])
        .collect();
    let mut comb = CombGraph::default();
    let mut todo: Vec<usize> = core.class_vertices().collect();
    todo.sort_by_key(|&v| (std::cmp::Reverse(prio[v]), v));

    let placed_slot = |slot: &[Option<u32>], v: usize| -> Option<u32> {
        if core.vertices[v].class().is_some() {
            slot[v]
        } else {
            None
        }
    };

    for t in 0..n {
        loop {
            let mut chosen = None;
            'cand: for (pos, &v) in todo.iter().enumerate() {
                let vx = &core.vertices[v];
                let class = vx.class().unwrap();
                let occ = vx.latency.max(1);
                if occ > n || (0..occ).any(|j| busy[class][((t + j) % n) as usize]) {
                    continue;
                }
                let mut new_comb = Vec::new();
                for &ai in &in_arcs[v] {
                    let a = &core.arcs[ai];
                    let u = if a.src == v {
                        Some(t)
                    } else if core.vertices[a.src].class().is_none() {
                        continue;
                    } else {
                        placed_slot(&slot, a.src)
                    };
                    match u {
                        None if a.w == 0 => continue 'cand,
                        None => {}
                        Some(u) => {
                            let d = folding_delay(a.w, a.p, u, t, n);
                            if d < 0 {
                                continue 'cand;
                            }
                            if d == 0 && core.combinational(a) {
                                new_comb.push(core.vertices[a.src].class().unwrap());
                            }
                        }
                    }
                }
                let mut new_out = Vec::new();
                for &ai in &out_arcs[v] {
                    let a = &core.arcs[ai];
                    if a.dst == v || core.vertices[a.dst].class().is_none() {
                        continue;
                    }
                    if let Some(x) = placed_slot(&slot, a.dst) {
                        let d = folding_delay(a.w, a.p, t, x, n);
                        if d < 0 {
                            continue 'cand;
                        }
                        if d == 0 && core.combinational(a) {
                            new_out.push(core.vertices[a.dst].class().unwrap());
                        }
                    }
                }
                let mut trial = comb.clone();
                for &c in &new_comb {
                    if trial.closes_loop(c, class) {
                        continue 'cand;
                    }
                    trial.add(c, class);
                }
                for &c in &new_out {
                    if trial.closes_loop(class, c) {
                        continue 'cand;
                    }
                    trial.add(class, c);
                }
                chosen = Some((pos, v, trial));
                break;
            }
            let Some((pos, v, trial)) = chosen else {
                break;
            };
            let vx = &core.vertices[v];
            let class = vx.class().unwrap();
            for j in 0..vx.latency.max(1) {
                busy[class][((t + j) % n) as usize] = true;
            }
            slot[v] = Some(t);
            comb = trial;
            todo.remove(pos);
        }
        if todo.is_empty() {
            break;
        }
    }
    if !todo.is_empty() {
        return None;
    }
    Some(slot.into_iter().map(|s| s.unwrap_or(0)).collect())
}

/// Outcome of the exhaustive search at one factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exact {
    /// Class slots of the first schedule found.
    Found(Vec<u32>),
    /// No assignment satisfies the constraints.
    Infeasible,
    /// Search budget ran out first.
    GaveUp,
}

/// Search-tree nodes the exhaustive fallback may visit per factor.
pub const EXACT_BUDGET: u64 = 400_000;

struct ExactSearch<'a> {
    core: &'a CoreGraph,
    n: u32,
    order: Vec<usize>,
    in_arcs: Vec<Vec<usize>>,
    out_arcs: Vec<Vec<usize>>,
    slot: Vec<Option<u32>>,
    busy: Vec<Vec<bool>>,
    visited: u64,
    budget: u64,
}

impl ExactSearch<'_> {
    /// Zero-delay class edges created by placing `v` at `t`, or `None` if a
    /// delay goes negative.
    fn arcs_ok(&self, v: usize, t: u32) -> Option<Vec<(usize, usize)>> {
        let core = self.core;
        let mut comb = Vec::new();
        let placed = |x: usize| if x == v { Some(t) } else { self.slot[x] };
        for &ai in self.in_arcs[v].iter().chain(&self.out_arcs[v]) {
            let a = &core.arcs[ai];
            if core.vertices[a.src].class().is_none() || core.vertices[a.dst].class().is_none() {
                continue;
            }
            let (Some(u), Some(x)) = (placed(a.src), placed(a.dst)) else {
                continue;
            };
            let d = folding_delay(a.w, a.p, u, x, self.n);
            if d < 0 {
                return None;
            }
            if d == 0 && core.combinational(a) {
                comb.push((
                    core.vertices[a.src].class().unwrap(),
                    core.vertices[a.dst].class().unwrap(),
                ));
            }
        }
        Some(comb)
    }

    fn go(&mut self, depth: usize, comb: &CombGraph) -> Exact {
        if depth == self.order.len() {
            return Exact::Found(self.slot.iter().map(|s| s.unwrap_or(0)).collect());
        }
        let v = self.order[depth];
        let vx = &self.core.vertices[v];
        let class = vx.class().unwrap();
        let occ = vx.latency.max(1);
        let mut gave_up = false;
        for t in 0..self.n {
            self.visited += 1;
            if self.visited > self.budget {
                return Exact::GaveUp;
            }
            if occ > self.n || (0..occ).any(|j| self.busy[class][((t + j) % self.n) as usize]) {
                continue;
            }
            let Some(edges) = self.arcs_ok(v, t) else {
                continue;
            };
            let mut trial = comb.clone();
            if edges.iter().any(|&(a, b)| {
                let closes = trial.closes_loop(a, b);
                trial.add(a, b);
                closes
            }) {
                continue;
            }
            for j in 0..occ {
                self.busy[class][((t + j) % self.n) as usize] = true;
            }
            self.slot[v] = Some(t);
            let r = self.go(depth + 1, &trial);
            self.slot[v] = None;
            for j in 0..occ {
                self.busy[class][((t + j) % self.n) as usize] = false;
            }
            match r {
                Exact::Found(s) => return Exact::Found(s),
                Exact::GaveUp => gave_up = true,
                Exact::Infeasible => {}
            }
            if gave_up {
                return Exact::GaveUp;
            }
        }
        Exact::Infeasible
    }
}

/// Depth-first search over all slot assignments at factor `n`.
pub fn exact_schedule(core: &CoreGraph, n: u32, budget: u64) -> Result<Exact> {
    if n == 0 {
        return Err(Error::InfeasibleFactor(0));
    }
    Ok(try_exact(core, n, &priorities(core)?, budget))
}

fn try_exact(core: &CoreGraph, n: u32, prio: &[u64], budget: u64) -> Exact {
    let nv = core.vertices.len();
    let mut in_arcs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, a) in core.arcs.iter().enumerate() {
        in_arcs[a.dst].push(i);
        if a.src != a.dst {
            out_arcs[a.src].push(i);
        }
    }
    let mut order: Vec<usize> = core.class_vertices().collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(prio[v]), v));
    let mut search = ExactSearch {
        core,
        n,
        order,
        in_arcs,
        out_arcs,
        slot: vec![None; nv],
        busy: core
            .classes
            .iter()
            .map(|_| vec![false; n as usize])
            .collect(),
        visited: 0,
        budget,
    };
    search.go(0, &CombGraph::default())
}

/// Smallest folding factor worth trying: every class must fit its
/// members' occupancy into one frame.
pub fn lower_bound(core: &CoreGraph) -> u32 {
    core.classes
        .iter()
        .map(|m| {
            m.iter()
                .map(|&v| core.vertices[v].latency.max(1))
                .sum::<u32>()
        })
        .max()
        .unwrap_or(1)
        .max(1)
}

/// Largest folding factor [`list_schedule`] tries.
pub fn factor_cap(core: &CoreGraph) -> u32 {
    let members: usize = core.classes.iter().map(Vec::len).sum();
    let max_latency = core.vertices.iter().map(|v| v.latency).max().unwrap_or(0);
    (members as u32 + max_latency).max(lower_bound(core))
}

/// Resource-constrained list scheduling.
///
/// With `n_hint`, schedules at exactly that factor. Otherwise tries
/// factors upward from [`lower_bound`] until one succeeds. Vertices are
/// placed slot by slot, highest priority first, ties by vertex order.
/// When that greedy pass fails, a bounded exhaustive search gets a turn
/// before the factor is given up.
pub fn list_schedule(core: &CoreGraph, n_hint: Option<u32>) -> Result<Schedule> {
    let prio = priorities(core)?;
    let attempt = |n: u32| {
        let slots =
            try_list(core, n, &prio).or_else(|| match try_exact(core, n, &prio, EXACT_BUDGET) {
                Exact::Found(s) => Some(s),
                Exact::Infeasible | Exact::GaveUp => None,
            })?;
        Some(Schedule::from_slots(core, n, &slots))
    };
    if let Some(n) = n_hint {
        if n == 0 {
            return Err(Error::InfeasibleFactor(0));
        }
        return attempt(n).ok_or(Error::InfeasibleFactor(n));
    }
    let cap = factor_cap(core);
    for n in lower_bound(core)..=cap {
        if let Some(s) = attempt(n) {
            debug_assert!(verify_schedule(core, &s).is_empty());
            return Ok(s);
        }
    }
    Err(Error::NoFeasibleFactor { cap })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcReport {
    pub src: String,
    pub dst: String,
    pub w_e: u32,
    #[serde(rename = "P_u")]
    pub p_u: u32,
    #[serde(rename = "D")]
    pub d: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub latency_offset: u32,
    pub slots: BTreeMap<String, u32>,
    pub arcs: Vec<ArcReport>,
}

impl ScheduleReport {
    pub fn new(core: &CoreGraph, s: &Schedule) -> Self {
        ScheduleReport {
            n: s.n,
            latency_offset: s.latency_offset,
            slots: core
                .class_vertices()
                .map(|v| (core.vertices[v].name.clone(), s.slots[v]))
                .collect(),
            arcs: core
                .arcs
                .iter()
                .map(|a| ArcReport {
                    src: core.vertices[a.src].name.clone(),
                    dst: core.vertices[a.dst].name.clone(),
                    w_e: a.w,
                    p_u: a.p,
                    d: s.delay(a),
                })
                .collect(),
        }
    }

    /// Rebuild a schedule for `core` from the slot map.
    pub fn to_schedule(&self, core: &CoreGraph) -> Result<Schedule> {
        let mut slots = vec![0; core.vertices.len()];
        for v in core.class_vertices() {
            let name = &core.vertices[v].name;
            slots[v] = *self.slots.get(name).ok_or_else(|| {
                Error::InvalidSchedule(format!("report has no slot for `{name}`"))
            })?;
        }
        Ok(Schedule::from_slots(core, self.n, &slots))
    }
}
