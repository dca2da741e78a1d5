//! The folding transformation: one shared unit per class, input
//! multiplexers with register chains, a mod-N controller, interleaved
//! unit registers and frame-level I/O wrappers.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, DataflowGraph, GraphBuilder, Node, NodeIx, OpKind, Params};
use crate::pattern::CorePattern;
use crate::schedule::{verify_schedule, CoreGraph, Schedule, VertexKind};

/// Why a node exists in the folded design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Operator of a shared unit.
    Unit,
    /// Register inside a shared unit after interleaving.
    InterleaveReg,
    /// Pipeline register at a multi-cycle unit's output.
    LatencyReg,
    Mux,
    /// Register on a unit or output input path.
    DelayChain,
    Controller,
    InputHold,
    OutputLatch,
    /// External input, constant input or output.
    Port,
}

/// Cost breakdown bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bucket {
    FoldingCore,
    Remain,
    Overhead,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub role: Role,
    pub bucket: Bucket,
    /// Class id; config classes first, then singleton classes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    /// Original nodes this node implements.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub origin: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuxInput {
    pub index: u32,
    pub source: String,
    pub delay: u32,
    /// Counter values that select this input.
    pub slots: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuxEntry {
    pub mux: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<usize>,
    /// Driven port, `node:port`.
    pub target: String,
    pub inputs: Vec<MuxInput>,
}

/// Sidecar metadata of a folded graph document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldMeta {
    #[serde(rename = "N")]
    pub n: u32,
    pub latency_offset: u32,
    pub notation: String,
    /// Instance count per config class.
    pub class_counts: Vec<usize>,
    pub select_table: Vec<MuxEntry>,
    pub provenance: BTreeMap<String, Provenance>,
}

#[derive(Clone, Debug)]
pub struct FoldedDesign {
    pub graph: DataflowGraph,
    pub n: u32,
    pub latency_offset: u32,
    pub notation: String,
    pub class_counts: Vec<usize>,
    pub select_table: Vec<MuxEntry>,
    pub provenance: BTreeMap<String, Provenance>,
}

impl FoldedDesign {
    pub fn meta(&self) -> FoldMeta {
        FoldMeta {
            n: self.n,
            latency_offset: self.latency_offset,
            notation: self.notation.clone(),
            class_counts: self.class_counts.clone(),
            select_table: self.select_table.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Reattach metadata to a folded graph; every node needs provenance.
    pub fn from_parts(graph: DataflowGraph, meta: FoldMeta) -> Result<Self> {
        if meta.n == 0 {
            return Err(Error::Metadata("N must be positive".into()));
        }
        if let Some(n) = graph
            .nodes()
            .iter()
            .find(|n| !meta.provenance.contains_key(&n.id))
        {
            return Err(Error::Metadata(format!(
                "no provenance for node `{}`",
                n.id
            )));
        }
        Ok(FoldedDesign {
            graph,
            n: meta.n,
            latency_offset: meta.latency_offset,
            notation: meta.notation,
            class_counts: meta.class_counts,
            select_table: meta.select_table,
            provenance: meta.provenance,
        })
    }

    pub fn parse_meta(text: &str) -> Result<FoldMeta> {
        serde_json::from_str(text).map_err(Error::syntax)
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta()).expect("metadata serializes")
    }

    pub fn nodes_with_role(&self, role: Role) -> impl Iterator<Item = &str> + '_ {
        self.provenance
            .iter()
            .filter(move |(_, p)| p.role == role)
            .map(|(id, _)| id.as_str())
    }
}

/// Suffix of the `i`-th extra register of an interleaved delay node.
fn chain_id(id: &str, i: u32) -> String {
    if i == 0 {
        id.to_string()
    } else {
        format!("{id}~{i}")
    }
}

/// Replace every delay node of the template by a chain of `n` delay nodes
/// and scale internal edge delays by `n`. The chain head keeps the
/// original id; the rest are `id~1 .. id~(n-1)`.
pub fn interleave_registers(pattern: &CorePattern, n: u32) -> CorePattern {
    let n = n.max(1);
    let t = &pattern.template;
    let mut b = GraphBuilder::new(t.name.clone());
    let tail = |ix: NodeIx| {
        let node = t.node(ix);
        if node.kind == OpKind::Delay {
            chain_id(&node.id, n - 1)
        } else {
            node.id.clone()
        }
    };
    for node in t.nodes() {
        b.add_node(node.clone());
        if node.kind == OpKind::Delay {
            for i in 1..n {
                let id = chain_id(&node.id, i);
                b.add_node(Node {
                    id: id.clone(),
                    ..node.clone()
                });
                b.connect(&chain_id(&node.id, i - 1), &id, 0);
            }
        }
    }
    for e in t.edges() {
        b.connect_delayed(
            &tail(e.src.node),
            e.src.port,
            t.id(e.dst.node),
            e.dst.port,
            e.delay * n,
        );
    }
    let template = b.build().expect("interleaving preserves references");
    let mut out = CorePattern::new(pattern.name.clone(), template)
        .expect("interleaving preserves pattern validity");
    // Boundary inputs stay on the original nodes; outputs move to chain tails.
    out.boundary_inputs = pattern
        .boundary_inputs
        .iter()
        .map(|p| crate::graph::PortRef::new(out.template.ix(t.id(p.node)).unwrap(), p.port))
        .collect();
    out.boundary_outputs = pattern
        .boundary_outputs
        .iter()
        .map(|p| crate::graph::PortRef::new(out.template.ix(&tail(p.node)).unwrap(), p.port))
        .collect();
    out
}

/// Counter node plus the select parameter of every mux.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Controller {
    pub counter: Node,
    /// Mux id -> counter value -> data input index.
    pub selects: Vec<(String, Vec<u32>)>,
}

/// The mod-`n` counter and the per-mux select wiring. Counter values not
/// claimed by any input select input 0.
pub fn build_controller(n: u32, table: &[MuxEntry]) -> Result<Controller> {
    if n == 0 {
        return Err(Error::InfeasibleFactor(0));
    }
    let mut selects = Vec::with_capacity(table.len());
    for entry in table {
        let mut sel = vec![0u32; n as usize];
        for input in &entry.inputs {
            for &s in &input.slots {
                if s >= n {
                    return Err(Error::SelectOutOfRange { value: s, n });
                }
                sel[s as usize] = input.index;
            }
        }
        selects.push((entry.mux.clone(), sel));
    }
    let counter = Node::new("ctrl", OpKind::Counter).with_params(Params {
        modulus: Some(n),
        ..Default::default()
    });
    Ok(Controller { counter, selects })
}

struct Emitter {
    b: GraphBuilder,
    prov: BTreeMap<String, Provenance>,
    used: HashSet<String>,
    /// Register bits of the original circuit not yet matched by a chain.
    remain_bits: u64,
}

impl Emitter {
    fn fresh(&mut self, base: String) -> String {
        if self.used.insert(base.clone()) {
            return base;
        }
        (2..)
            .map(|i| format!("{base}'{i}"))
            .find(|c| self.used.insert(c.clone()))
            .unwrap()
    }

    fn node(
        &mut self,
        mut node: Node,
        role: Role,
        bucket: Bucket,
        class: Option<usize>,
        origin: Vec<String>,
    ) -> String {
        node.id = self.fresh(node.id);
        let id = node.id.clone();
        self.prov.insert(
            id.clone(),
            Provenance {
                role,
                bucket,
                class,
                origin,
            },
        );
        self.b.add_node(node);
        id
    }

    fn reg(
        &mut self,
        id: String,
        width: u32,
        role: Role,
        bucket: Bucket,
        class: Option<usize>,
    ) -> String {
        let mut n = Node::new(id, OpKind::Delay);
        n.width = width;
        self.node(n, role, bucket, class, vec![])
    }

    /// `len` registers after `from`; returns the chain's last node. Chain
    /// registers stand in for the original circuit's registers outside the
    /// cores, so they count as remain until those are used up.
    fn chain(
        &mut self,
        from: &str,
        len: u32,
        base: &str,
        width: u32,
        class: Option<usize>,
    ) -> String {
        let mut prev = from.to_string();
        for j in 0..len {
            let bucket = if self.remain_bits >= width as u64 {
                self.remain_bits -= width as u64;
                Bucket::Remain
            } else {
                Bucket::Overhead
            };
            let id = self.reg(
                format!("{base}/z{j}"),
                width,
                Role::DelayChain,
                bucket,
                class,
            );
            self.b.connect(&prev, &id, 0);
            prev = id;
        }
        prev
    }
}

/// One shared unit: the interleaved template instantiated once.
struct Unit {
    class: usize,
    pattern: CorePattern,
    /// Vertices bound to the unit.
    members: Vec<usize>,
    /// Original template node -> folded node id receiving its inputs.
    head: Vec<String>,
    /// Original template node -> folded node id carrying its output.
    out: Vec<String>,
}

/// Fold the canonical circuit of `core` under a verified schedule.
pub fn fold(core: &CoreGraph, schedule: &Schedule) -> Result<FoldedDesign> {
    let violations = verify_schedule(core, schedule);
    if !violations.is_empty() {
        return Err(Error::InvalidSchedule(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    let g = &core.graph;
    let n = schedule.n;
    let width = g.width();
    let n_config = core.num_config_classes();
    let mut em = Emitter {
        b: GraphBuilder::new(format!("{}-folded", g.name)),
        prov: BTreeMap::new(),
        used: g
            .nodes()
            .iter()
            .filter(|x| x.kind.is_io())
            .map(|x| x.id.clone())
            .collect(),
        remain_bits: core.outside_reg_bits,
    };
    em.used.extend(
        core.vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Single { .. }))
            .map(|v| v.name.clone()),
    );
    let ctrl = em.fresh("ctrl".into());
    let mut counter = Node::new(ctrl.clone(), OpKind::Counter).with_params(Params {
        modulus: Some(n),
        ..Default::default()
    });
    counter.width = width;
    em.prov.insert(
        ctrl.clone(),
        Provenance {
            role: Role::Controller,
            bucket: Bucket::Overhead,
            class: None,
            origin: vec![],
        },
    );
    em.b.add_node(counter);

    // External ports keep their ids; inputs are held for the whole frame.
    let mut signal: HashMap<NodeIx, String> = HashMap::new();
    let mut pending_mux: Vec<(MuxEntry, Node)> = Vec::new();
    for (ix, node) in g.nodes().iter().enumerate() {
        if !node.kind.is_io() {
            continue;
        }
        em.prov.insert(
            node.id.clone(),
            Provenance {
                role: Role::Port,
                bucket: Bucket::Remain,
                class: None,
                origin: vec![node.id.clone()],
            },
        );
        em.b.add_node(node.clone());
        if node.kind == OpKind::Input && n > 1 {
            let mux_id = em.fresh(format!("{}/hold", node.id));
            let reg = em.reg(
                format!("{}/hold/z", node.id),
                node.width,
                Role::InputHold,
                Bucket::Overhead,
                None,
            );
            em.prov.insert(
                mux_id.clone(),
                Provenance {
                    role: Role::InputHold,
                    bucket: Bucket::Overhead,
                    class: None,
                    origin: vec![],
                },
            );
            em.b.connect(&ctrl, &mux_id, 0)
                .connect(&node.id, &mux_id, 1)
                .connect(&reg, &mux_id, 2)
                .connect(&mux_id, &reg, 0);
            let entry = MuxEntry {
                mux: mux_id.clone(),
                class: None,
                target: mux_id.clone(),
                inputs: vec![
                    MuxInput {
                        index: 0,
                        source: node.id.clone(),
                        delay: 0,
                        slots: vec![0],
                    },
                    MuxInput {
                        index: 1,
                        source: reg.clone(),
                        delay: 0,
                        slots: (1..n).collect(),
                    },
                ],
            };
            let mut m = Node::new(mux_id.clone(), OpKind::Mux);
            m.width = node.width;
            pending_mux.push((entry, m));
            signal.insert(ix, mux_id);
        } else if node.kind != OpKind::Output {
            signal.insert(ix, node.id.clone());
        }
    }

    let arc_of = core.arc_of_edge();

    // Units.
    let mut units: Vec<Unit> = Vec::with_capacity(core.classes.len());
    for (c, members) in core.classes.iter().enumerate() {
        let is_config = c < n_config;
        let pattern = if is_config {
            core.config.classes[c].pattern.clone()
        } else {
            let VertexKind::Single { node, .. } = core.vertices[members[0]].kind else {
                unreachable!("non-config classes are singletons");
            };
            let mut b = GraphBuilder::new(g.id(node));
            b.add_node(g.node(node).clone());
            CorePattern::new(g.id(node), b.build()?)?
        };
        let ilv = interleave_registers(&pattern, n);
        let prefix = if is_config {
            em.fresh(format!("core{c}"))
        } else {
            String::new()
        };
        let name = |tid: &str| {
            if prefix.is_empty() {
                tid.to_string()
            } else {
                format!("{prefix}/{tid}")
            }
        };
        let body = if is_config {
            Bucket::FoldingCore
        } else {
            Bucket::Remain
        };
        let origin_of = |t: NodeIx| -> Vec<String> {
            members
                .iter()
                .map(|&v| match core.vertices[v].kind {
                    VertexKind::Instance { .. } => {
                        let (_, inst) = core.instance(v).unwrap();
                        g.id(inst.nodes[t]).to_string()
                    }
                    VertexKind::Single { node, .. } => g.id(node).to_string(),
                    _ => unreachable!(),
                })
                .collect()
        };
        let tt = &ilv.template;
        let mut folded_id: Vec<String> = Vec::with_capacity(tt.len());
        for node in tt.nodes() {
            let orig = pattern.template.ix(&node.id);
            let (role, bucket) = match (node.kind, orig) {
                (OpKind::Delay, Some(_)) => (Role::InterleaveReg, body),
                (OpKind::Delay, None) => (Role::InterleaveReg, Bucket::Overhead),
                _ => (Role::Unit, body),
            };
            let mut fresh = node.clone();
            fresh.id = name(&node.id);
            if !is_config {
                // reserved up front so generated names keep clear of it
                em.used.remove(&fresh.id);
            }
            let origin = orig.map(origin_of).unwrap_or_default();
            folded_id.push(em.node(fresh, role, bucket, Some(c), origin));
        }
        for e in tt.edges() {
            let src = &folded_id[e.src.node];
            let dst = &folded_id[e.dst.node];
            let kept = e.delay / n;
            let mut prev = src.clone();
            for j in 0..e.delay {
                let bucket = if j < kept { body } else { Bucket::Overhead };
                let id = em.reg(
                    format!("{dst}:{}/z{j}", e.dst.port),
                    width,
                    Role::InterleaveReg,
                    bucket,
                    Some(c),
                );
                em.b.connect(&prev, &id, 0);
                prev = id;
            }
            em.b.connect_delayed(&prev, e.src.port, dst, e.dst.port, 0);
        }
        let p = core.vertices[members[0]].latency;
        let t = &pattern.template;
        let mut head = Vec::with_capacity(t.len());
        let mut out = Vec::with_capacity(t.len());
        for (ti, node) in t.nodes().iter().enumerate() {
            head.push(folded_id[tt.ix(&node.id).unwrap()].clone());
            let tail_id = if node.kind == OpKind::Delay {
                chain_id(&node.id, n - 1)
            } else {
                node.id.clone()
            };
            let tail = folded_id[tt.ix(&tail_id).unwrap()].clone();
            let used = members.iter().any(|&v| {
                let gn = match core.vertices[v].kind {
                    VertexKind::Instance { .. } => core.instance(v).unwrap().1.nodes[ti],
                    VertexKind::Single { node, .. } => node,
                    _ => unreachable!(),
                };
                g.out_edges(gn).iter().any(|e| arc_of.contains_key(e))
            });
            let mut sig = tail;
            if used && p > 0 {
                for j in 0..p {
                    let id = em.reg(
                        format!("{}/lat{j}", head[ti]),
                        width,
                        Role::LatencyReg,
                        Bucket::Overhead,
                        Some(c),
                    );
                    em.b.connect(&sig, &id, 0);
                    sig = id;
                }
            }
            out.push(sig);
        }
        units.push(Unit {
            class: c,
            pattern,
            members: members.clone(),
            head,
            out,
        });
    }

    // Where each circuit node's value appears in the folded design.
    let source_of = |node: NodeIx, units: &[Unit]| -> String {
        let v = core.vertex_of[node];
        match core.vertices[v].kind {
            VertexKind::Instance { class, .. } => {
                let (_, inst) = core.instance(v).unwrap();
                let t = inst.nodes.iter().position(|&x| x == node).unwrap();
                units[class].out[t].clone()
            }
            VertexKind::Single { class, .. } => units[class].out[0].clone(),
            VertexKind::Input { .. } => signal[&node].clone(),
            VertexKind::Output { .. } => unreachable!("outputs drive nothing"),
        }
    };
    let mut select_table = Vec::new();

    // Unit inputs: one mux per port with several (source, D) keys.
    for unit in &units {
        let t = &unit.pattern.template;
        let mut by_slot = unit.members.clone();
        by_slot.sort_by_key(|&v| schedule.slots[v]);
        for bp in &unit.pattern.boundary_inputs {
            let mut keys: Vec<(String, u32, Vec<u32>)> = Vec::new();
            for &v in &by_slot {
                let (gn, gp) = match core.vertices[v].kind {
                    VertexKind::Instance { .. } => {
                        let (_, inst) = core.instance(v).unwrap();
                        (inst.nodes[bp.node], inst.graph_port(bp.node, bp.port))
                    }
                    VertexKind::Single { node, .. } => (node, bp.port),
                    _ => unreachable!(),
                };
                let e = g
                    .driver(crate::graph::PortRef::new(gn, gp))
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("{}:{gp} is undriven", g.id(gn)))
                    })?;
                let arc = &core.arcs[arc_of[&e]];
                let d = schedule.delay(arc) as u32;
                let src = source_of(g.edge(e).src.node, &units);
                let slot = schedule.slots[v];
                match keys.iter_mut().find(|k| k.0 == src && k.1 == d) {
                    Some(k) => k.2.push(slot),
                    None => keys.push((src, d, vec![slot])),
                }
            }
            let target = unit.head[bp.node].clone();
            let port = bp.port;
            let base = format!("{target}:{port}");
            let class = Some(unit.class);
            if keys.len() == 1 {
                let (src, d, _) = &keys[0];
                let end = em.chain(src, *d, &base, width, class);
                em.b.connect(&end, &target, port);
                continue;
            }
            let mux_id = em.fresh(format!("{base}/mux"));
            em.prov.insert(
                mux_id.clone(),
                Provenance {
                    role: Role::Mux,
                    bucket: Bucket::Overhead,
                    class,
                    origin: vec![],
                },
            );
            em.b.connect(&ctrl, &mux_id, 0);
            let mut inputs = Vec::with_capacity(keys.len());
            for (i, (src, d, slots)) in keys.iter().enumerate() {
                let end = em.chain(src, *d, &format!("{base}/k{i}"), width, class);
                em.b.connect(&end, &mux_id, 1 + i);
                inputs.push(MuxInput {
                    index: i as u32,
                    source: src.clone(),
                    delay: *d,
                    slots: slots.clone(),
                });
            }
            em.b.connect(&mux_id, &target, port);
            let mut m = Node::new(mux_id.clone(), OpKind::Mux);
            m.width = t.node(bp.node).width;
            pending_mux.push((
                MuxEntry {
                    mux: mux_id,
                    class,
                    target: format!("{target}:{port}"),
                    inputs,
                },
                m,
            ));
        }
    }

    // Outputs: register chain, then a latch capturing once per frame.
    let offset = schedule.latency_offset;
    for &o in g.outputs() {
        let e = g
            .driver(crate::graph::PortRef::new(o, 0))
            .expect("outputs are driven");
        let arc = &core.arcs[arc_of[&e]];
        let d = folding_delay_to_output(arc, schedule);
        let src = source_of(g.edge(e).src.node, &units);
        let oid = g.id(o).to_string();
        let end = em.chain(&src, d, &format!("{oid}/in"), width, None);
        if n == 1 {
            em.b.connect(&end, &oid, 0);
            continue;
        }
        let mux_id = em.fresh(format!("{oid}/latch"));
        let reg = em.reg(
            format!("{oid}/latch/z"),
            width,
            Role::OutputLatch,
            Bucket::Overhead,
            None,
        );
        em.prov.insert(
            mux_id.clone(),
            Provenance {
                role: Role::OutputLatch,
                bucket: Bucket::Overhead,
                class: None,
                origin: vec![],
            },
        );
        em.b.connect(&ctrl, &mux_id, 0)
            .connect(&end, &mux_id, 1)
            .connect(&reg, &mux_id, 2)
            .connect(&mux_id, &reg, 0)
            .connect(&mux_id, &oid, 0);
        let capture = offset % n;
        let mut m = Node::new(mux_id.clone(), OpKind::Mux);
        m.width = width;
        pending_mux.push((
            MuxEntry {
                mux: mux_id.clone(),
                class: None,
                target: format!("{oid}:0"),
                inputs: vec![
                    MuxInput {
                        index: 0,
                        source: end,
                        delay: d,
                        slots: vec![capture],
                    },
                    MuxInput {
                        index: 1,
                        source: reg,
                        delay: 0,
                        slots: (0..n).filter(|&c| c != capture).collect(),
                    },
                ],
            },
            m,
        ));
    }

    let table: Vec<MuxEntry> = pending_mux.iter().map(|(e, _)| e.clone()).collect();
    let controller = build_controller(n, &table)?;
    for ((entry, mut node), (_, sel)) in pending_mux.into_iter().zip(controller.selects) {
        node.params = Params {
            inputs: Some(entry.inputs.len() as u32),
            select: sel,
            ..Default::default()
        };
        em.b.add_node(node);
        select_table.push(entry);
    }

    em.b.inputs = g.inputs().iter().map(|&i| g.id(i).to_string()).collect();
    em.b.outputs = g.outputs().iter().map(|&i| g.id(i).to_string()).collect();
    let graph = em.b.build()?;
    let violations = validate(&graph);
    if !violations.is_empty() {
        return Err(Error::InvalidGraph(violations));
    }
    Ok(FoldedDesign {
        graph,
        n,
        latency_offset: offset,
        notation: core.config.notation(),
        class_counts: core
            .config
            .classes
            .iter()
            .map(|c| c.instances.len())
            .collect(),
        select_table,
        provenance: em.prov,
    })
}

fn folding_delay_to_output(arc: &crate::schedule::CoreArc, s: &Schedule) -> u32 {
    let d = crate::schedule::folding_delay(arc.w, arc.p, s.slots[arc.src], s.latency_offset, s.n);
    debug_assert!(d >= 0);
    d as u32
}

/// Build the core graph, schedule it and fold, in one step.
pub fn fold_config(
    graph: &DataflowGraph,
    config: &crate::pattern::FoldingConfig,
    n_hint: Option<u32>,
) -> Result<(CoreGraph, Schedule, FoldedDesign)> {
    let core = crate::schedule::build_core_graph(graph, config)?;
    let schedule = crate::schedule::list_schedule(&core, n_hint)?;
    let folded = fold(&core, &schedule)?;
    Ok((core, schedule, folded))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_pi, patterns};
    use crate::fixed::FixedPointFormat;
    use crate::pattern::{match_pattern, select_cover, FoldingConfig};
    use crate::schedule::{build_core_graph, list_schedule};
    use crate::sim::{check_equivalence, Stimuli};

    fn fmt() -> FixedPointFormat {
        FixedPointFormat::default()
    }

    fn pi_folded() -> (DataflowGraph, FoldedDesign) {
        let g = gen_pi(fmt(), 0.5, 0.25);
        let p = patterns::mult_add();
        let cfg = select_cover(&[(p.clone(), match_pattern(&g, &p))], &[2]).unwrap();
        let (_, _, folded) = fold_config(&g, &cfg, None).unwrap();
        (g, folded)
    }

    fn kinds(g: &DataflowGraph, role: Role, d: &FoldedDesign) -> Vec<OpKind> {
        let mut v: Vec<OpKind> = d
            .nodes_with_role(role)
            .map(|id| g.node(g.ix(id).unwrap()).kind)
            .collect();
        v.sort();
        v
    }

    #[test]
    fn pi_folds_onto_one_mult_add_unit() {
        let (g, f) = pi_folded();
        assert_eq!(f.n, 2);
        assert_eq!(
            kinds(&f.graph, Role::Unit, &f),
            vec![OpKind::Add, OpKind::Mult]
        );
        assert_eq!(f.graph.count_kind(OpKind::Mult), 1);
        assert_eq!(f.graph.count_kind(OpKind::Add), 1);
        assert_eq!(f.graph.count_kind(OpKind::Counter), 1);
        let ctrl = f.graph.node(f.graph.ix("ctrl").unwrap());
        assert_eq!(ctrl.params.modulus, Some(2));
        // multiplier operands differ per instance; the adder feeds back on
        // itself through one register either way
        let unit_muxes: Vec<&MuxEntry> = f
            .select_table
            .iter()
            .filter(|m| m.class == Some(0))
            .collect();
        assert_eq!(unit_muxes.len(), 2);
        assert!(unit_muxes.iter().all(|m| m.target.starts_with("core0/m:")));
        let stim = Stimuli::random(&g, fmt(), 500, 3);
        assert!(check_equivalence(&g, &f, &stim, 500, fmt()).unwrap().pass);
    }

    #[test]
    fn pi_select_follows_slots() {
        let (_, f) = pi_folded();
        let m = f
            .select_table
            .iter()
            .find(|m| m.target == "core0/m:1")
            .unwrap();
        let by_slot: BTreeMap<u32, &str> = m
            .inputs
            .iter()
            .flat_map(|i| i.slots.iter().map(move |&s| (s, i.source.as_str())))
            .collect();
        // add1's product (gain b0) runs in slot 0, add2's (b1) in slot 1
        assert_eq!(by_slot[&0], "b0");
        assert_eq!(by_slot[&1], "b1");
        let sel = &f.graph.node(f.graph.ix(&m.mux).unwrap()).params.select;
        assert_eq!(sel.len(), 2);
    }

    #[test]
    fn identity_folding_is_unit_factor_without_wrappers() {
        let g = gen_pi(fmt(), 0.5, 0.25);
        let (_, s, f) = fold_config(&g, &FoldingConfig::default(), None).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(f.graph.count_kind(OpKind::Mux), 0);
        assert_eq!(f.nodes_with_role(Role::InputHold).count(), 0);
        assert_eq!(f.nodes_with_role(Role::OutputLatch).count(), 0);
        let stim = Stimuli::random(&g, fmt(), 200, 1);
        assert!(check_equivalence(&g, &f, &stim, 200, fmt()).unwrap().pass);
    }

    #[test]
    fn interleaving_scales_registers() {
        let p = patterns::pid_i();
        let three = interleave_registers(&p, 3);
        assert_eq!(three.template.count_kind(OpKind::Delay), 3);
        assert_eq!(three.boundary_inputs.len(), p.boundary_inputs.len());
        assert_eq!(three.boundary_outputs.len(), p.boundary_outputs.len());
        let plain = patterns::mult_add();
        let same = interleave_registers(&plain, 5);
        assert_eq!(same.template.len(), plain.template.len());
        let two = interleave_registers(&patterns::fir_taps(2), 2);
        assert_eq!(two.template.count_kind(OpKind::Delay), 4);
        assert!(crate::graph::topo_order(&two.template).is_ok());
    }

    #[test]
    fn controller_rejects_out_of_range_slots() {
        let entry = MuxEntry {
            mux: "m".into(),
            class: Some(0),
            target: "u:0".into(),
            inputs: vec![
                MuxInput {
                    index: 0,
                    source: "a".into(),
                    delay: 0,
                    slots: vec![0],
                },
                MuxInput {
                    index: 1,
                    source: "b".into(),
                    delay: 0,
                    slots: vec![3],
                },
            ],
        };
        assert!(matches!(
            build_controller(3, std::slice::from_ref(&entry)),
            Err(Error::SelectOutOfRange { value: 3, n: 3 })
        ));
        let c = build_controller(4, &[entry]).unwrap();
        assert_eq!(c.counter.params.modulus, Some(4));
        assert_eq!(c.selects[0].1, vec![0, 0, 0, 1]);
    }

    #[test]
    fn fold_refuses_invalid_schedule() {
        let g = gen_pi(fmt(), 0.5, 0.25);
        let p = patterns::mult_add();
        let cfg = select_cover(&[(p.clone(), match_pattern(&g, &p))], &[2]).unwrap();
        let core = build_core_graph(&g, &cfg).unwrap();
        let mut s = list_schedule(&core, None).unwrap();
        for v in core.classes[0].clone() {
            s.slots[v] = 0;
        }
        assert!(matches!(fold(&core, &s), Err(Error::InvalidSchedule(_))));
    }

    #[test]
    fn metadata_round_trip() {
        let (_, f) = pi_folded();
        let meta = FoldedDesign::parse_meta(&f.meta_json()).unwrap();
        assert_eq!(meta, f.meta());
        let back = FoldedDesign::from_parts(f.graph.clone(), meta).unwrap();
        assert_eq!(back.n, 2);
        let mut partial = f.meta();
        partial.provenance.remove("ctrl");
        assert!(FoldedDesign::from_parts(f.graph.clone(), partial).is_err());
    }
}
