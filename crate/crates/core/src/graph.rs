//! Synchronous dataflow graph model.
//!
//! Nodes are kept sorted by id, so a node index doubles as its canonical
//! rank: every tie-break in the crate that says "by node id" compares
//! indices.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type NodeIx = usize;

/// Word length used by every node of a graph.
pub const DEFAULT_WIDTH: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpKind {
    Add,
    Sub,
    Mult,
    Negate,
    ConstInput,
    SineLut,
    Delay,
    Mux,
    Counter,
    Input,
    Output,
}

impl OpKind {
    pub const ALL: [OpKind; 11] = [
        OpKind::Add,
        OpKind::Sub,
        OpKind::Mult,
        OpKind::Negate,
        OpKind::ConstInput,
        OpKind::SineLut,
        OpKind::Delay,
        OpKind::Mux,
        OpKind::Counter,
        OpKind::Input,
        OpKind::Output,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mult => "mult",
            OpKind::Negate => "negate",
            OpKind::ConstInput => "const-input",
            OpKind::SineLut => "sine-lut",
            OpKind::Delay => "delay",
            OpKind::Mux => "mux",
            OpKind::Counter => "counter",
            OpKind::Input => "input",
            OpKind::Output => "output",
        }
    }

    pub fn from_name(name: &str) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Two-operand kinds whose operands may be swapped.
    pub fn is_commutative(self) -> bool {
        matches!(self, OpKind::Add | OpKind::Mult)
    }

    /// Kinds fed from outside the graph.
    pub fn is_source(self) -> bool {
        matches!(self, OpKind::Input | OpKind::ConstInput)
    }

    pub fn is_io(self) -> bool {
        self.is_source() || self == OpKind::Output
    }

    /// Kinds whose output is a stored state rather than a function of the
    /// current-cycle inputs.
    pub fn is_stateful(self) -> bool {
        matches!(self, OpKind::Delay | OpKind::Counter)
    }

    /// Kinds that may be bound into a folding core.
    pub fn is_foldable(self) -> bool {
        !self.is_io() && !matches!(self, OpKind::Mux | OpKind::Counter)
    }

    pub fn num_outputs(self) -> usize {
        match self {
            OpKind::Output => 0,
            _ => 1,
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kind-specific node parameters.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    /// Default raw word driven by a `const-input` when stimuli omit it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<i32>,
    /// Number of data inputs of a `mux`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<u32>,
    /// `mux` select wiring: counter value -> data input index.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub select: Vec<u32>,
    /// `counter` modulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u32>,
}

impl Params {
    pub fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: OpKind,
    /// Pipeline depth of the hardware unit, in clock cycles.
    pub latency: u32,
    pub width: u32,
    pub params: Params,
}

impl Node {
    pub fn new(id: impl Into<String>, kind: OpKind) -> Self {
        Node {
            id: id.into(),
            kind,
            latency: 0,
            width: DEFAULT_WIDTH,
            params: Params::default(),
        }
    }

    pub fn with_params(mut self, params: Params) -> Self {
        self.params = params;
        self
    }

    pub fn with_latency(mut self, latency: u32) -> Self {
        self.latency = latency;
        self
    }

    pub fn num_inputs(&self) -> usize {
        match self.kind {
            OpKind::Add | OpKind::Sub | OpKind::Mult => 2,
            OpKind::Negate | OpKind::SineLut | OpKind::Delay | OpKind::Output => 1,
            OpKind::Mux => 1 + self.params.inputs.unwrap_or(0) as usize,
            OpKind::Counter | OpKind::Input | OpKind::ConstInput => 0,
        }
    }

    pub fn num_outputs(&self) -> usize {
        self.kind.num_outputs()
    }

    /// Structural equality ignoring the id.
    pub fn same_shape(&self, other: &Node) -> bool {
        self.kind == other.kind
            && self.latency == other.latency
            && self.width == other.width
            && self.params == other.params
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub node: NodeIx,
    pub port: usize,
}

impl PortRef {
    pub fn new(node: NodeIx, port: usize) -> Self {
        PortRef { node, port }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: PortRef,
    pub dst: PortRef,
    /// Register count on the edge.
    pub delay: u32,
}

/// An invariant violation found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MultiplyDriven {
        node: String,
        port: usize,
        drivers: usize,
    },
    Unconnected {
        node: String,
        port: usize,
    },
    ZeroDelayCycle {
        nodes: Vec<String>,
    },
    WidthMismatch {
        node: String,
        width: u32,
        expected: u32,
    },
    UnlistedPort {
        node: String,
    },
    NotAPort {
        node: String,
    },
    BadParams {
        node: String,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MultiplyDriven {
                node,
                port,
                drivers,
            } => {
                write!(f, "input port {node}:{port} has {drivers} drivers")
            }
            Violation::Unconnected { node, port } => {
                write!(f, "input port {node}:{port} is unconnected")
            }
            Violation::ZeroDelayCycle { nodes } => {
                write!(f, "zero-delay cycle {}", nodes.join(" -> "))
            }
            Violation::WidthMismatch {
                node,
                width,
                expected,
            } => {
                write!(f, "node {node} is {width} bits wide, graph uses {expected}")
            }
            Violation::UnlistedPort { node } => {
                write!(f, "I/O node {node} is missing from the port lists")
            }
            Violation::NotAPort { node } => {
                write!(
                    f,
                    "port list entry {node} is not an I/O node of the right direction"
                )
            }
            Violation::BadParams { node, reason } => write!(f, "node {node}: {reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataflowGraph {
    pub name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    inputs: Vec<NodeIx>,
    outputs: Vec<NodeIx>,
    index: HashMap<String, NodeIx>,
    fanin: Vec<Vec<usize>>,
    fanout: Vec<Vec<usize>>,
}

impl DataflowGraph {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// External inputs (`input` and `const-input` nodes) in port order.
    pub fn inputs(&self) -> &[NodeIx] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NodeIx] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ix(&self, id: &str) -> Option<NodeIx> {
        self.index.get(id).copied()
    }

    pub fn id(&self, ix: NodeIx) -> &str {
        &self.nodes[ix].id
    }

    /// Indices of edges entering `node`.
    pub fn in_edges(&self, node: NodeIx) -> &[usize] {
        &self.fanin[node]
    }

    /// Indices of edges leaving `node`.
    pub fn out_edges(&self, node: NodeIx) -> &[usize] {
        &self.fanout[node]
    }

    /// The (first) edge driving an input port.
    pub fn driver(&self, port: PortRef) -> Option<usize> {
        self.fanin[port.node]
            .iter()
            .copied()
            .find(|&e| self.edges[e].dst.port == port.port)
    }

    pub fn count_kind(&self, kind: OpKind) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    /// Multiset of node kinds.
    pub fn census(&self) -> std::collections::BTreeMap<OpKind, usize> {
        let mut out = std::collections::BTreeMap::new();
        for n in &self.nodes {
            *out.entry(n.kind).or_insert(0) += 1;
        }
        out
    }

    /// Whether edge `e` carries a same-cycle dependency.
    pub fn is_combinational(&self, e: usize) -> bool {
        let edge = &self.edges[e];
        edge.delay == 0 && !self.nodes[edge.dst.node].kind.is_stateful()
    }

    pub fn width(&self) -> u32 {
        self.nodes.first().map_or(DEFAULT_WIDTH, |n| n.width)
    }

    /// A builder pre-loaded with this graph's contents.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut b = GraphBuilder::new(self.name.clone());
        for n in &self.nodes {
            b.add_node(n.clone());
        }
        for e in &self.edges {
            b.connect_delayed(
                self.id(e.src.node),
                e.src.port,
                self.id(e.dst.node),
                e.dst.port,
                e.delay,
            );
        }
        b.inputs = self
            .inputs
            .iter()
            .map(|&i| self.id(i).to_string())
            .collect();
        b.outputs = self
            .outputs
            .iter()
            .map(|&i| self.id(i).to_string())
            .collect();
        b
    }
}

/// Accumulates nodes and edges by id and resolves them into a graph.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    pub name: String,
    pub nodes: Vec<Node>,
    pub edges: Vec<(String, usize, String, usize, u32)>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        GraphBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn add_node(&mut self, node: Node) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn op(&mut self, id: &str, kind: OpKind) -> &mut Self {
        self.add_node(Node::new(id, kind))
    }

    pub fn input(&mut self, id: &str) -> &mut Self {
        self.inputs.push(id.to_string());
        self.op(id, OpKind::Input)
    }

    pub fn constant(&mut self, id: &str, raw: i32) -> &mut Self {
        self.inputs.push(id.to_string());
        self.add_node(Node::new(id, OpKind::ConstInput).with_params(Params {
            value: Some(raw),
            ..Default::default()
        }))
    }

    pub fn output(&mut self, id: &str, from: &str) -> &mut Self {
        self.outputs.push(id.to_string());
        self.op(id, OpKind::Output);
        self.connect(from, id, 0)
    }

    /// Connect output port 0 of `src` to input `port` of `dst`.
    pub fn connect(&mut self, src: &str, dst: &str, port: usize) -> &mut Self {
        self.connect_delayed(src, 0, dst, port, 0)
    }

    pub fn connect_delayed(
        &mut self,
        src: &str,
        src_port: usize,
        dst: &str,
        dst_port: usize,
        delay: u32,
    ) -> &mut Self {
        self.edges
            .push((src.to_string(), src_port, dst.to_string(), dst_port, delay));
        self
    }

    /// Binary operator `id = kind(a, b)`.
    pub fn binary(&mut self, id: &str, kind: OpKind, a: &str, b: &str) -> &mut Self {
        self.op(id, kind).connect(a, id, 0).connect(b, id, 1)
    }

    pub fn unary(&mut self, id: &str, kind: OpKind, a: &str) -> &mut Self {
        self.op(id, kind).connect(a, id, 0)
    }

    /// Resolve ids. Fails on duplicate ids, dangling references and port
    /// indices outside a node's arity; everything else is left to
    /// [`validate`].
    pub fn build(&self) -> Result<DataflowGraph> {
        let mut nodes = self.nodes.clone();
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(n.id.clone()));
            }
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::DanglingReference(id.to_string()))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (src, sp, dst, dp, delay) in &self.edges {
            let s = lookup(src)?;
            let d = lookup(dst)?;
            if *sp >= nodes[s].num_outputs() {
                return Err(Error::BadPort {
                    node: src.clone(),
                    kind: nodes[s].kind.name(),
                    direction: "output",
                    port: *sp,
                });
            }
            if *dp >= nodes[d].num_inputs() {
                return Err(Error::BadPort {
                    node: dst.clone(),
                    kind: nodes[d].kind.name(),
                    direction: "input",
                    port: *dp,
                });
            }
            edges.push(Edge {
                src: PortRef::new(s, *sp),
                dst: PortRef::new(d, *dp),
                delay: *delay,
            });
        }
        edges.sort_by_key(|e| (e.dst, e.src, e.delay));
        let inputs = self
            .inputs
            .iter()
            .map(|id| lookup(id))
            .collect::<Result<Vec<_>>>()?;
        let outputs = self
            .outputs
            .iter()
            .map(|id| lookup(id))
            .collect::<Result<Vec<_>>>()?;
        let mut fanin = vec![Vec::new(); nodes.len()];
        let mut fanout = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            fanin[e.dst.node].push(i);
            fanout[e.src.node].push(i);
        }
        Ok(DataflowGraph {
            name: self.name.clone(),
            nodes,
            edges,
            inputs,
            outputs,
            index,
            fanin,
            fanout,
        })
    }
}

/// Report every invariant violation; empty iff the graph is simulable.
pub fn validate(graph: &DataflowGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let width = graph.width();
    for (ix, node) in graph.nodes().iter().enumerate() {
        if node.width != width {
            out.push(Violation::WidthMismatch {
                node: node.id.clone(),
                width: node.width,
                expected: width,
            });
        }
        for port in 0..node.num_inputs() {
            let drivers = graph
                .in_edges(ix)
                .iter()
                .filter(|&&e| graph.edge(e).dst.port == port)
                .count();
            match drivers {
                0 => out.push(Violation::Unconnected {
                    node: node.id.clone(),
                    port,
                }),
                1 => {}
                n => out.push(Violation::MultiplyDriven {
                    node: node.id.clone(),
                    port,
                    drivers: n,
                }),
            }
        }
        if let Some(reason) = params_problem(node) {
            out.push(Violation::BadParams {
                node: node.id.clone(),
                reason,
            });
        }
        let listed = match node.kind {
            OpKind::Input | OpKind::ConstInput => graph.inputs().contains(&ix),
            OpKind::Output => graph.outputs().contains(&ix),
            _ => true,
        };
        if !listed {
            out.push(Violation::UnlistedPort {
                node: node.id.clone(),
            });
        }
    }
    let mut seen = BTreeSet::new();
    for &i in graph.inputs() {
        if !graph.node(i).kind.is_source() || !seen.insert(i) {
            out.push(Violation::NotAPort {
                node: graph.id(i).to_string(),
            });
        }
    }
    for &o in graph.outputs() {
        if graph.node(o).kind != OpKind::Output || !seen.insert(o) {
            out.push(Violation::NotAPort {
                node: graph.id(o).to_string(),
            });
        }
    }
    if let Err(cycle) = comb_order(graph) {
        out.push(Violation::ZeroDelayCycle { nodes: cycle });
    }
    out
}

fn params_problem(node: &Node) -> Option<String> {
    match node.kind {
        OpKind::Mux => {
            let inputs = node.params.inputs.unwrap_or(0);
            if inputs == 0 {
                return Some("mux needs at least one data input".into());
            }
            if node.params.select.is_empty() {
                return Some("mux has an empty select table".into());
            }
            if let Some(bad) = node.params.select.iter().find(|&&s| s >= inputs) {
                return Some(format!("mux select entry {bad} >= {inputs} data inputs"));
            }
            None
        }
        OpKind::Counter => match node.params.modulus {
            Some(m) if m >= 1 => None,
            _ => Some("counter needs a modulus >= 1".into()),
        },
        _ => None,
    }
}

/// Kahn's algorithm over same-cycle dependencies with a min-index heap.
/// On failure returns the ids along one zero-delay cycle.
fn comb_order(graph: &DataflowGraph) -> std::result::Result<Vec<NodeIx>, Vec<String>> {
    let n = graph.len();
    let mut indeg = vec![0usize; n];
    for (e, edge) in graph.edges().iter().enumerate() {
        if graph.is_combinational(e) {
            indeg[edge.dst.node] += 1;
        }
    }
    let mut heap: BinaryHeap<Reverse<NodeIx>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(u)) = heap.pop() {
        order.push(u);
        for &e in graph.out_edges(u) {
            if graph.is_combinational(e) {
                let v = graph.edge(e).dst.node;
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(Reverse(v));
                }
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }
    // Every leftover node has a leftover combinational predecessor, so
    // walking predecessors must revisit a node.
    let mut pos = vec![usize::MAX; n];
    let mut walk = Vec::new();
    let mut u = (0..n).find(|&i| indeg[i] > 0).expect("leftover node");
    while pos[u] == usize::MAX {
        pos[u] = walk.len();
        walk.push(u);
        u = graph
            .in_edges(u)
            .iter()
            .copied()
            .filter(|&e| graph.is_combinational(e))
            .map(|e| graph.edge(e).src.node)
            .find(|&p| indeg[p] > 0)
            .expect("leftover predecessor");
    }
    let mut cycle: Vec<String> = walk[pos[u]..]
        .iter()
        .rev()
        .map(|&i| graph.id(i).to_string())
        .collect();
    cycle.push(cycle[0].clone());
    Err(cycle)
}

/// Node order in which every same-cycle dependency points forward.
///
/// Edges entering a `delay` node are not same-cycle dependencies: a delay's
/// output is its stored state. Ties are broken by node id.
pub fn topo_order(graph: &DataflowGraph) -> Result<Vec<NodeIx>> {
    comb_order(graph).map_err(Error::ZeroDelayCycle)
}

/// Rewrite every `delay` node not in `protected` into edge delays.
///
/// A delay driven only by itself has no source to fold into and is kept.
pub fn canonicalize(graph: &DataflowGraph, protected: &BTreeSet<String>) -> DataflowGraph {
    #[derive(Clone)]
    struct E {
        src: NodeIx,
        sp: usize,
        dst: NodeIx,
        dp: usize,
        delay: u32,
    }
    let mut edges: Vec<Option<E>> = graph
        .edges()
        .iter()
        .map(|e| {
            Some(E {
                src: e.src.node,
                sp: e.src.port,
                dst: e.dst.node,
                dp: e.dst.port,
                delay: e.delay,
            })
        })
        .collect();
    let mut removed = vec![false; graph.len()];
    for d in 0..graph.len() {
        let node = graph.node(d);
        if node.kind != OpKind::Delay || protected.contains(&node.id) {
            continue;
        }
        let Some(in_ix) = edges
            .iter()
            .position(|e| e.as_ref().is_some_and(|e| e.dst == d))
        else {
            continue;
        };
        let inbound = edges[in_ix].clone().unwrap();
        if inbound.src == d {
            continue;
        }
        edges[in_ix] = None;
        for e in edges.iter_mut().flatten() {
            if e.src == d {
                e.src = inbound.src;
                e.sp = inbound.sp;
                e.delay += inbound.delay + 1;
            }
        }
        removed[d] = true;
    }
    let mut b = GraphBuilder::new(graph.name.clone());
    for (ix, n) in graph.nodes().iter().enumerate() {
        if !removed[ix] {
            b.add_node(n.clone());
        }
    }
    for e in edges.into_iter().flatten() {
        b.connect_delayed(graph.id(e.src), e.sp, graph.id(e.dst), e.dp, e.delay);
    }
    b.inputs = graph
        .inputs()
        .iter()
        .map(|&i| graph.id(i).to_string())
        .collect();
    b.outputs = graph
        .outputs()
        .iter()
        .map(|&i| graph.id(i).to_string())
        .collect();
    b.build().expect("canonicalize preserves references")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(protect: bool) -> (DataflowGraph, BTreeSet<String>) {
        let mut b = GraphBuilder::new("chain");
        b.input("a")
            .unary("d1", OpKind::Delay, "a")
            .unary("d2", OpKind::Delay, "d1")
            .unary("n", OpKind::Negate, "d2")
            .output("y", "n");
        let mut p = BTreeSet::new();
        if protect {
            p.insert("d1".to_string());
            p.insert("d2".to_string());
        }
        (b.build().unwrap(), p)
    }

    #[test]
    fn delay_chain_folds_into_edge() {
        let (g, p) = chain(false);
        let c = canonicalize(&g, &p);
        assert_eq!(c.count_kind(OpKind::Delay), 0);
        let n = c.ix("n").unwrap();
        let e = c.edge(c.driver(PortRef::new(n, 0)).unwrap());
        assert_eq!((c.id(e.src.node), e.delay), ("a", 2));
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn protected_delays_stay() {
        let (g, p) = chain(true);
        assert_eq!(canonicalize(&g, &p), g);
    }

    #[test]
    fn delay_fanout_duplicates_registers_per_branch() {
        let mut b = GraphBuilder::new("fan");
        b.input("a")
            .unary("d", OpKind::Delay, "a")
            .unary("n1", OpKind::Negate, "d")
            .unary("n2", OpKind::Negate, "d")
            .output("y1", "n1")
            .output("y2", "n2");
        let c = canonicalize(&b.build().unwrap(), &BTreeSet::new());
        let delays: Vec<u32> = c
            .edges()
            .iter()
            .filter(|e| c.id(e.src.node) == "a")
            .map(|e| e.delay)
            .collect();
        assert_eq!(delays, vec![1, 1]);
    }

    #[test]
    fn self_driven_delay_is_kept() {
        let mut b = GraphBuilder::new("ring");
        b.op("d", OpKind::Delay)
            .connect("d", "d", 0)
            .output("y", "d");
        let g = b.build().unwrap();
        let c = canonicalize(&g, &BTreeSet::new());
        assert_eq!(c.count_kind(OpKind::Delay), 1);
    }

    #[test]
    fn topo_chain_and_diamond() {
        let mut b = GraphBuilder::new("c");
        b.input("in")
            .constant("k", 1)
            .binary("mult", OpKind::Mult, "in", "k")
            .binary("add", OpKind::Add, "mult", "in")
            .output("out", "add");
        let g = b.build().unwrap();
        let ids: Vec<&str> = topo_order(&g).unwrap().iter().map(|&i| g.id(i)).collect();
        let pos = |id: &str| ids.iter().position(|&x| x == id).unwrap();
        assert!(pos("in") < pos("mult") && pos("mult") < pos("add") && pos("add") < pos("out"));

        let mut b = GraphBuilder::new("diamond");
        b.input("a")
            .unary("c", OpKind::Negate, "a")
            .unary("b", OpKind::Negate, "a")
            .binary("d", OpKind::Add, "b", "c")
            .output("z", "d");
        let g = b.build().unwrap();
        let ids: Vec<&str> = topo_order(&g).unwrap().iter().map(|&i| g.id(i)).collect();
        assert_eq!(ids, vec!["a", "b", "c", "d", "z"]);
    }

    #[test]
    fn feedback_through_register_is_orderable() {
        let mut b = GraphBuilder::new("acc");
        b.input("x")
            .op("s", OpKind::Add)
            .connect("x", "s", 0)
            .connect_delayed("s", 0, "s", 1, 1)
            .output("y", "s");
        let g = b.build().unwrap();
        assert!(validate(&g).is_empty());
        assert_eq!(topo_order(&g).unwrap().len(), 3);
    }

    #[test]
    fn combinational_loop_is_reported() {
        let mut b = GraphBuilder::new("loop");
        b.input("x")
            .op("a1", OpKind::Add)
            .op("a2", OpKind::Add)
            .op("a3", OpKind::Add)
            .connect("x", "a1", 0)
            .connect("a3", "a1", 1)
            .connect("a1", "a2", 0)
            .connect("x", "a2", 1)
            .connect("a2", "a3", 0)
            .connect("x", "a3", 1)
            .output("y", "a3");
        let v = validate(&b.build().unwrap());
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::ZeroDelayCycle { nodes } => {
                assert_eq!(nodes.len(), 4);
                assert_eq!(nodes.first(), nodes.last());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unconnected_and_multiply_driven() {
        let mut b = GraphBuilder::new("bad");
        b.input("x")
            .op("a", OpKind::Add)
            .connect("x", "a", 0)
            .output("y", "a")
            .connect("x", "y", 0);
        let v = validate(&b.build().unwrap());
        assert!(v.contains(&Violation::Unconnected {
            node: "a".into(),
            port: 1
        }));
        assert!(v.contains(&Violation::MultiplyDriven {
            node: "y".into(),
            port: 0,
            drivers: 2
        }));
    }

    #[test]
    fn build_rejects_bad_references() {
        let mut b = GraphBuilder::new("bad");
        b.input("x").connect("x", "nope", 0);
        assert!(matches!(b.build(), Err(Error::DanglingReference(id)) if id == "nope"));

        let mut b = GraphBuilder::new("bad");
        b.input("x")
            .unary("n", OpKind::Negate, "x")
            .connect("x", "n", 1);
        assert!(matches!(b.build(), Err(Error::BadPort { port: 1, .. })));
    }
}
