//! Folding-core patterns, their embeddings in a circuit, and the selection
//! of disjoint instances into core classes.
//!
//! An embedding maps every template node to a distinct circuit node with
//! the same kind, width, latency and parameters, and maps the template's
//! edges one-to-one onto the edges of the induced circuit subgraph with
//! identical ports and delays. Operands of `add` and `mult` may be swapped.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::doc::{EdgeDoc, GraphDoc, NodeDoc};
use crate::error::{Error, Result};
use crate::graph::{DataflowGraph, GraphBuilder, Node, NodeIx, OpKind, PortRef};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorePattern {
    pub name: String,
    pub template: DataflowGraph,
    pub boundary_inputs: Vec<PortRef>,
    pub boundary_outputs: Vec<PortRef>,
}

impl CorePattern {
    pub fn new(name: impl Into<String>, template: DataflowGraph) -> Result<Self> {
        let name = name.into();
        let bad = |reason: String| Error::InvalidPattern {
            pattern: name.clone(),
            reason,
        };
        if template.is_empty() {
            return Err(bad("template is empty".into()));
        }
        if let Some(n) = template.nodes().iter().find(|n| !n.kind.is_foldable()) {
            return Err(bad(format!(
                "node `{}` of kind {} cannot be folded",
                n.id, n.kind
            )));
        }
        if !is_connected(&template) {
            return Err(bad("template is not connected".into()));
        }
        let mut boundary_inputs = Vec::new();
        for (ix, n) in template.nodes().iter().enumerate() {
            for port in 0..n.num_inputs() {
                let drivers = template
                    .in_edges(ix)
                    .iter()
                    .filter(|&&e| template.edge(e).dst.port == port)
                    .count();
                match drivers {
                    0 => boundary_inputs.push(PortRef::new(ix, port)),
                    1 => {}
                    _ => return Err(bad(format!("input {}:{port} is multiply driven", n.id))),
                }
            }
        }
        let boundary_outputs = (0..template.len())
            .filter(|&ix| template.out_edges(ix).is_empty())
            .map(|ix| PortRef::new(ix, 0))
            .collect();
        if let Err(e) = crate::graph::topo_order(&template) {
            return Err(bad(e.to_string()));
        }
        Ok(CorePattern {
            name,
            template,
            boundary_inputs,
            boundary_outputs,
        })
    }

    /// A pattern consisting of one operator.
    pub fn single(kind: OpKind) -> Result<Self> {
        let mut b = GraphBuilder::new(kind.name());
        b.op(kind.name(), kind);
        CorePattern::new(kind.name(), b.build()?)
    }

    pub fn size(&self) -> usize {
        self.template.len()
    }

    /// Kind multiset, e.g. `{2add,2mult,2delay}`.
    pub fn multiset(&self) -> String {
        let census = self.template.census();
        let parts: Vec<String> = census
            .iter()
            .map(|(k, &c)| {
                if c == 1 {
                    k.name().to_string()
                } else {
                    format!("{c}{}", k.name())
                }
            })
            .collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: PatternDoc = serde_json::from_str(text).map_err(Error::syntax)?;
        doc.to_pattern()
    }

    pub fn to_doc(&self) -> PatternDoc {
        let t = &self.template;
        let port = |p: &PortRef| (t.id(p.node).to_string(), p.port);
        PatternDoc {
            graph: GraphDoc::from_graph(t),
            boundary_inputs: Some(self.boundary_inputs.iter().map(port).collect()),
            boundary_outputs: Some(self.boundary_outputs.iter().map(port).collect()),
        }
    }
}

fn is_connected(g: &DataflowGraph) -> bool {
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &e in g.in_edges(u).iter().chain(g.out_edges(u)) {
            let edge = g.edge(e);
            for v in [edge.src.node, edge.dst.node] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
    }
    count == g.len()
}

/// Pattern document: a graph document plus optional boundary port lists,
/// which must equal the template's unconnected ports when present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternDoc {
    #[serde(flatten)]
    pub graph: GraphDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_inputs: Option<Vec<(String, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_outputs: Option<Vec<(String, usize)>>,
}

impl PatternDoc {
    pub fn to_pattern(&self) -> Result<CorePattern> {
        let pattern = CorePattern::new(self.graph.name.clone(), self.graph.to_graph()?)?;
        let t = &pattern.template;
        let check = |given: &Option<Vec<(String, usize)>>, actual: &[PortRef], what: &str| {
            if let Some(given) = given {
                let mut g: Vec<_> = given.clone();
                let mut a: Vec<_> = actual
                    .iter()
                    .map(|p| (t.id(p.node).to_string(), p.port))
                    .collect();
                g.sort();
                a.sort();
                if g != a {
                    return Err(Error::InvalidPattern {
                        pattern: pattern.name.clone(),
                        reason: format!("{what} do not match the unconnected template ports {a:?}"),
                    });
                }
            }
            Ok(())
        };
        check(
            &self.boundary_inputs,
            &pattern.boundary_inputs,
            "boundary_inputs",
        )?;
        check(
            &self.boundary_outputs,
            &pattern.boundary_outputs,
            "boundary_outputs",
        )?;
        Ok(pattern)
    }
}

/// One embedding of a pattern template into a circuit graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoreInstance {
    /// Template node index -> circuit node index.
    pub nodes: Vec<NodeIx>,
    /// Per template node: operands of a commutative node are swapped.
    pub swapped: Vec<bool>,
}

impl CoreInstance {
    /// Circuit input port that template input `port` of template node `t`
    /// corresponds to.
    pub fn graph_port(&self, t: usize, port: usize) -> usize {
        if self.swapped[t] {
            1 - port
        } else {
            port
        }
    }

    pub fn sorted_nodes(&self) -> Vec<NodeIx> {
        let mut v = self.nodes.clone();
        v.sort_unstable();
        v
    }

    /// Canonical ordering key: the sorted node set, then the mapping.
    fn order_key(&self) -> (Vec<NodeIx>, Vec<NodeIx>) {
        (self.sorted_nodes(), self.nodes.clone())
    }

    pub fn contains(&self, n: NodeIx) -> bool {
        self.nodes.contains(&n)
    }
}

/// Template edges as (src template, src port, dst template, dst port, delay).
fn template_edges(t: &DataflowGraph) -> Vec<(usize, usize, usize, usize, u32)> {
    t.edges()
        .iter()
        .map(|e| (e.src.node, e.src.port, e.dst.node, e.dst.port, e.delay))
        .collect()
}

fn node_compatible(t: &Node, g: &Node) -> bool {
    t.same_shape(g)
}

struct Matcher<'a> {
    graph: &'a DataflowGraph,
    template: &'a DataflowGraph,
    order: Vec<usize>,
    tedges: Vec<(usize, usize, usize, usize, u32)>,
    map: Vec<Option<NodeIx>>,
    swapped: Vec<bool>,
    used: Vec<bool>,
    found: Vec<CoreInstance>,
}

impl Matcher<'_> {
    fn tport(&self, t: usize, port: usize) -> usize {
        if self.swapped[t] {
            1 - port
        } else {
            port
        }
    }

    /// Check template edges between `t` (just mapped) and earlier-mapped
    /// nodes, and that the induced circuit edges are no more numerous.
    fn consistent(&self, t: usize) -> bool {
        let g = self.graph;
        let gt = self.map[t].unwrap();
        let mut expected = 0;
        for &(s, sp, d, dp, w) in &self.tedges {
            let (Some(gs), Some(gd)) = (self.map[s], self.map[d]) else {
                continue;
            };
            if s != t && d != t {
                continue;
            }
            expected += 1;
            let gdp = self.tport(d, dp);
            let hit = g.in_edges(gd).iter().any(|&e| {
                let edge = g.edge(e);
                edge.dst.port == gdp
                    && edge.src.node == gs
                    && edge.src.port == sp
                    && edge.delay == w
            });
            if !hit {
                return false;
            }
        }
        let mapped = |n: NodeIx| self.used[n];
        let induced = g
            .in_edges(gt)
            .iter()
            .filter(|&&e| mapped(g.edge(e).src.node))
            .count()
            + g.out_edges(gt)
                .iter()
                .filter(|&&e| {
                    let d = g.edge(e).dst.node;
                    d != gt && mapped(d)
                })
                .count();
        induced == expected
    }

    fn candidates(&self, t: usize) -> Vec<NodeIx> {
        let g = self.graph;
        for &(s, sp, d, _dp, _) in &self.tedges {
            if d == t && s != t {
                if let Some(gs) = self.map[s] {
                    let mut c: Vec<NodeIx> = g
                        .out_edges(gs)
                        .iter()
                        .map(|&e| g.edge(e))
                        .filter(|e| e.src.port == sp)
                        .map(|e| e.dst.node)
                        .collect();
                    c.sort_unstable();
                    c.dedup();
                    return c;
                }
            }
            if s == t && d != t {
                if let Some(gd) = self.map[d] {
                    let mut c: Vec<NodeIx> =
                        g.in_edges(gd).iter().map(|&e| g.edge(e).src.node).collect();
                    c.sort_unstable();
                    c.dedup();
                    return c;
                }
            }
        }
        (0..g.len()).collect()
    }

    fn search(&mut self, depth: usize) {
        if depth == self.order.len() {
            self.found.push(CoreInstance {
                nodes: self.map.iter().map(|m| m.unwrap()).collect(),
                swapped: self.swapped.clone(),
            });
            return;
        }
        let t = self.order[depth];
        let tnode = self.template.node(t);
        let swaps: &[bool] = if tnode.kind.is_commutative() && tnode.num_inputs() == 2 {
            &[false, true]
        } else {
            &[false]
        };
        for g in self.candidates(t) {
            if self.used[g] || !node_compatible(tnode, self.graph.node(g)) {
                continue;
            }
            self.map[t] = Some(g);
            self.used[g] = true;
            for &sw in swaps {
                self.swapped[t] = sw;
                if self.consistent(t) {
                    self.search(depth + 1);
                }
            }
            self.swapped[t] = false;
            self.used[g] = false;
            self.map[t] = None;
        }
    }
}

/// Template nodes in breadth-first order from node 0, so every node after
/// the first is adjacent to an earlier one.
fn bfs_order(t: &DataflowGraph) -> Vec<usize> {
    let mut seen = vec![false; t.len()];
    let mut order = Vec::with_capacity(t.len());
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &e in t.in_edges(u).iter().chain(t.out_edges(u)) {
            let edge = t.edge(e);
            for v in [edge.src.node, edge.dst.node] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    order
}

/// All embeddings of `pattern` in `graph`, possibly overlapping, ordered
/// by their sorted node sets.
///
/// Embeddings that differ only in operand swaps are reported once, with
/// the unswapped assignment preferred.
pub fn match_pattern(graph: &DataflowGraph, pattern: &CorePattern) -> Vec<CoreInstance> {
    let template = &pattern.template;
    if template.len() > graph.len() {
        return Vec::new();
    }
    let mut m = Matcher {
        graph,
        template,
        order: bfs_order(template),
        tedges: template_edges(template),
        map: vec![None; template.len()],
        swapped: vec![false; template.len()],
        used: vec![false; graph.len()],
        found: Vec::new(),
    };
    m.search(0);
    let mut seen = BTreeSet::new();
    let mut out: Vec<CoreInstance> = m
        .found
        .into_iter()
        .filter(|inst| seen.insert(inst.nodes.clone()))
        .collect();
    out.sort_by_key(|i| i.order_key());
    out
}

/// Whether `inst` is a valid embedding of `pattern`, checked edge by edge.
pub fn is_embedding(graph: &DataflowGraph, pattern: &CorePattern, inst: &CoreInstance) -> bool {
    let t = &pattern.template;
    if inst.nodes.len() != t.len() || inst.swapped.len() != t.len() {
        return false;
    }
    let set: BTreeSet<NodeIx> = inst.nodes.iter().copied().collect();
    if set.len() != t.len() || inst.nodes.iter().any(|&n| n >= graph.len()) {
        return false;
    }
    for (ti, &gi) in inst.nodes.iter().enumerate() {
        let tn = t.node(ti);
        if !node_compatible(tn, graph.node(gi)) {
            return false;
        }
        if inst.swapped[ti] && !(tn.kind.is_commutative() && tn.num_inputs() == 2) {
            return false;
        }
    }
    let mut want: Vec<(NodeIx, usize, NodeIx, usize, u32)> = t
        .edges()
        .iter()
        .map(|e| {
            (
                inst.nodes[e.src.node],
                e.src.port,
                inst.nodes[e.dst.node],
                inst.graph_port(e.dst.node, e.dst.port),
                e.delay,
            )
        })
        .collect();
    let mut have: Vec<(NodeIx, usize, NodeIx, usize, u32)> = graph
        .edges()
        .iter()
        .filter(|e| set.contains(&e.src.node) && set.contains(&e.dst.node))
        .map(|e| (e.src.node, e.src.port, e.dst.node, e.dst.port, e.delay))
        .collect();
    want.sort_unstable();
    have.sort_unstable();
    want == have
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreClass {
    pub pattern: CorePattern,
    pub instances: Vec<CoreInstance>,
}

impl CoreClass {
    pub fn notation(&self) -> String {
        format!("{}{}", self.instances.len(), self.pattern.multiset())
    }
}

/// Core classes bound to shared units. Instances are pairwise disjoint
/// across all classes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoldingConfig {
    pub classes: Vec<CoreClass>,
}

impl FoldingConfig {
    /// Folding-core notation, e.g. `5{2add,2mult,2delay}, 2{add,mult,delay}`.
    pub fn notation(&self) -> String {
        if self.classes.is_empty() {
            return "{}".into();
        }
        self.classes
            .iter()
            .map(CoreClass::notation)
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Circuit nodes bound to any class.
    pub fn covered(&self) -> BTreeSet<NodeIx> {
        self.classes
            .iter()
            .flat_map(|c| c.instances.iter().flat_map(|i| i.nodes.iter().copied()))
            .collect()
    }
}

/// Pick `targets[k]` pairwise-disjoint instances for every class.
///
/// Classes are filled largest pattern first (ties by class order), each
/// taking candidates in their canonical order.
pub fn select_cover(
    candidates: &[(CorePattern, Vec<CoreInstance>)],
    targets: &[usize],
) -> Result<FoldingConfig> {
    select_cover_with(candidates, targets, &BTreeSet::new())
}

fn select_cover_with(
    candidates: &[(CorePattern, Vec<CoreInstance>)],
    targets: &[usize],
    reserved: &BTreeSet<NodeIx>,
) -> Result<FoldingConfig> {
    assert_eq!(candidates.len(), targets.len());
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by_key(|&k| std::cmp::Reverse(candidates[k].0.size()));
    let mut used = reserved.clone();
    let mut picked: Vec<Vec<CoreInstance>> = vec![Vec::new(); candidates.len()];
    for k in order {
        let (pattern, insts) = &candidates[k];
        for inst in insts {
            if picked[k].len() == targets[k] {
                break;
            }
            if inst.nodes.iter().all(|n| !used.contains(n)) {
                used.extend(inst.nodes.iter().copied());
                picked[k].push(inst.clone());
            }
        }
        if picked[k].len() < targets[k] {
            return Err(Error::InfeasibleCount {
                class: k,
                notation: format!("{}{}", targets[k], pattern.multiset()),
                requested: targets[k],
                found: picked[k].len(),
            });
        }
    }
    Ok(FoldingConfig {
        classes: candidates
            .iter()
            .zip(picked)
            .map(|((p, _), instances)| CoreClass {
                pattern: p.clone(),
                instances,
            })
            .collect(),
    })
}

/// Largest graph [`select_cover_exact`] accepts.
pub const EXACT_COVER_LIMIT: usize = 20;

/// Exhaustive counterpart of [`select_cover`]: finds a disjoint selection
/// with the requested counts whenever one exists. Returns `None` when the
/// graph exceeds [`EXACT_COVER_LIMIT`] nodes or no selection exists.
pub fn select_cover_exact(
    graph: &DataflowGraph,
    candidates: &[(CorePattern, Vec<CoreInstance>)],
    targets: &[usize],
) -> Option<FoldingConfig> {
    if graph.len() > EXACT_COVER_LIMIT {
        return None;
    }
    fn go(
        cands: &[(CorePattern, Vec<CoreInstance>)],
        targets: &[usize],
        k: usize,
        from: usize,
        used: &mut Vec<bool>,
        picked: &mut Vec<Vec<CoreInstance>>,
    ) -> bool {
        if k == cands.len() {
            return true;
        }
        if picked[k].len() == targets[k] {
            return go(cands, targets, k + 1, 0, used, picked);
        }
        let insts = &cands[k].1;
        let need = targets[k] - picked[k].len();
        for i in from..insts.len() {
            if insts.len() - i < need {
                break;
            }
            let inst = &insts[i];
            if inst.nodes.iter().any(|&n| used[n]) {
                continue;
            }
            for &n in &inst.nodes {
                used[n] = true;
            }
            picked[k].push(inst.clone());
            if go(cands, targets, k, i + 1, used, picked) {
                return true;
            }
            picked[k].pop();
            for &n in &inst.nodes {
                used[n] = false;
            }
        }
        false
    }
    let mut used = vec![false; graph.len()];
    let mut picked = vec![Vec::new(); candidates.len()];
    if go(candidates, targets, 0, 0, &mut used, &mut picked) {
        Some(FoldingConfig {
            classes: candidates
                .iter()
                .zip(picked)
                .map(|((p, _), instances)| CoreClass {
                    pattern: p.clone(),
                    instances,
                })
                .collect(),
        })
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigViolation {
    EmptyClass {
        class: usize,
    },
    Overlap {
        node: String,
        classes: (usize, usize),
    },
    NotIsomorphic {
        class: usize,
        instance: usize,
    },
    OutOfRange {
        class: usize,
        instance: usize,
    },
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::EmptyClass { class } => write!(f, "class {class} has no instances"),
            ConfigViolation::Overlap { node, classes } => write!(
                f,
                "node {node} is bound by classes {} and {}",
                classes.0, classes.1
            ),
            ConfigViolation::NotIsomorphic { class, instance } => write!(
                f,
                "instance {instance} of class {class} is not an embedding of the class pattern"
            ),
            ConfigViolation::OutOfRange { class, instance } => write!(
                f,
                "instance {instance} of class {class} references nodes outside the graph"
            ),
        }
    }
}

/// Check disjointness and the isomorphism of every instance to its class
/// pattern (so all instances of a class are mutually isomorphic, internal
/// edge delays included).
pub fn check_config(graph: &DataflowGraph, config: &FoldingConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();
    let mut owner: BTreeMap<NodeIx, usize> = BTreeMap::new();
    for (k, class) in config.classes.iter().enumerate() {
        if class.instances.is_empty() {
            out.push(ConfigViolation::EmptyClass { class: k });
        }
        for (i, inst) in class.instances.iter().enumerate() {
            if inst.nodes.iter().any(|&n| n >= graph.len()) {
                out.push(ConfigViolation::OutOfRange {
                    class: k,
                    instance: i,
                });
                continue;
            }
            if !is_embedding(graph, &class.pattern, inst) {
                out.push(ConfigViolation::NotIsomorphic {
                    class: k,
                    instance: i,
                });
            }
            for &n in &inst.nodes {
                if let Some(prev) = owner.insert(n, k) {
                    out.push(ConfigViolation::Overlap {
                        node: graph.id(n).to_string(),
                        classes: (prev, k),
                    });
                }
            }
        }
    }
    out
}

/// Pattern reference inside a configuration document: an inline pattern,
/// the name of a single operator kind, or a path relative to the document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PatternRef {
    Inline(Box<PatternDoc>),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub pattern: PatternRef,
    pub count: usize,
    /// Explicit embeddings: template node id -> circuit node id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<Vec<BTreeMap<String, String>>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub classes: Vec<ClassDoc>,
}

impl ConfigDoc {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::syntax)
    }

    /// A configuration with inline patterns and counts.
    pub fn from_patterns(name: &str, classes: &[(&CorePattern, usize)]) -> Self {
        ConfigDoc {
            name: Some(name.to_string()),
            classes: classes
                .iter()
                .map(|(p, count)| ClassDoc {
                    pattern: PatternRef::Inline(Box::new(p.to_doc())),
                    count: *count,
                    instances: None,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config documents serialize")
    }
}

fn load_pattern(r: &PatternRef, base: Option<&Path>) -> Result<CorePattern> {
    match r {
        PatternRef::Inline(doc) => doc.to_pattern(),
        PatternRef::Name(name) => {
            if let Some(kind) = OpKind::from_name(name).filter(|k| k.is_foldable()) {
                return CorePattern::single(kind);
            }
            let path = match base {
                Some(b) => b.join(name),
                None => Path::new(name).to_path_buf(),
            };
            let text = std::fs::read_to_string(&path).map_err(|e| {
                Error::InvalidConfig(format!("cannot read pattern `{}`: {e}", path.display()))
            })?;
            CorePattern::parse(&text)
        }
    }
}

fn explicit_instance(
    graph: &DataflowGraph,
    pattern: &CorePattern,
    map: &BTreeMap<String, String>,
) -> Result<CoreInstance> {
    let t = &pattern.template;
    let mut nodes = Vec::with_capacity(t.len());
    for tn in t.nodes() {
        let gid = map.get(&tn.id).ok_or_else(|| {
            Error::InvalidConfig(format!("explicit instance lacks template node `{}`", tn.id))
        })?;
        nodes.push(
            graph
                .ix(gid)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown circuit node `{gid}`")))?,
        );
    }
    // Commutative operands: keep the first swap assignment that embeds.
    let flexible: Vec<usize> = (0..t.len())
        .filter(|&i| t.node(i).kind.is_commutative() && t.node(i).num_inputs() == 2)
        .collect();
    for mask in 0u64..(1u64 << flexible.len().min(16)) {
        let mut swapped = vec![false; t.len()];
        for (b, &i) in flexible.iter().enumerate() {
            swapped[i] = mask >> b & 1 == 1;
        }
        let inst = CoreInstance {
            nodes: nodes.clone(),
            swapped,
        };
        if is_embedding(graph, pattern, &inst) {
            return Ok(inst);
        }
    }
    // Leave the isomorphism failure to check_config.
    Ok(CoreInstance {
        swapped: vec![false; t.len()],
        nodes,
    })
}

/// Turn a configuration document into a concrete folding configuration
/// on `graph`. Classes with explicit instances reserve their nodes first;
/// the rest are filled by [`select_cover`].
pub fn resolve_config(
    graph: &DataflowGraph,
    doc: &ConfigDoc,
    base: Option<&Path>,
) -> Result<FoldingConfig> {
    let patterns = doc
        .classes
        .iter()
        .map(|c| load_pattern(&c.pattern, base))
        .collect::<Result<Vec<_>>>()?;
    let mut reserved = BTreeSet::new();
    let mut explicit: Vec<Option<Vec<CoreInstance>>> = Vec::new();
    for (c, p) in doc.classes.iter().zip(&patterns) {
        match &c.instances {
            Some(maps) => {
                if maps.len() != c.count {
                    return Err(Error::InvalidConfig(format!(
                        "class {} lists {} instances but count is {}",
                        p.multiset(),
                        maps.len(),
                        c.count
                    )));
                }
                let insts = maps
                    .iter()
                    .map(|m| explicit_instance(graph, p, m))
                    .collect::<Result<Vec<_>>>()?;
                for i in &insts {
                    reserved.extend(i.nodes.iter().copied());
                }
                explicit.push(Some(insts));
            }
            None => explicit.push(None),
        }
    }
    let mut candidates = Vec::new();
    let mut targets = Vec::new();
    let mut slots = Vec::new();
    for (k, p) in patterns.iter().enumerate() {
        if explicit[k].is_none() {
            candidates.push((p.clone(), match_pattern(graph, p)));
            targets.push(doc.classes[k].count);
            slots.push(k);
        }
    }
    let auto = select_cover_with(&candidates, &targets, &reserved).map_err(|e| match e {
        Error::InfeasibleCount {
            class,
            notation,
            requested,
            found,
        } => Error::InfeasibleCount {
            class: slots[class],
            notation,
            requested,
            found,
        },
        other => other,
    })?;
    let mut auto = auto.classes.into_iter();
    let classes = patterns
        .into_iter()
        .zip(explicit)
        .map(|(pattern, ex)| match ex {
            Some(instances) => CoreClass { pattern, instances },
            None => auto.next().expect("one auto class per slot"),
        })
        .collect();
    let config = FoldingConfig { classes };
    let violations = check_config(graph, &config);
    if !violations.is_empty() {
        return Err(Error::InvalidConfig(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ));
    }
    Ok(config)
}

/// Embeddings as JSON-friendly maps, template id -> circuit id.
pub fn instance_map(
    graph: &DataflowGraph,
    pattern: &CorePattern,
    inst: &CoreInstance,
) -> BTreeMap<String, String> {
    pattern
        .template
        .nodes()
        .iter()
        .zip(&inst.nodes)
        .map(|(t, &g)| (t.id.clone(), graph.id(g).to_string()))
        .collect()
}

/// Build a pattern from node/edge lists, as used by the generators.
pub fn pattern_from(
    name: &str,
    nodes: &[(&str, OpKind)],
    edges: &[(&str, &str, usize, u32)],
) -> CorePattern {
    let doc = PatternDoc {
        graph: GraphDoc {
            name: name.to_string(),
            nodes: nodes
                .iter()
                .map(|(id, kind)| NodeDoc {
                    id: id.to_string(),
                    kind: *kind,
                    width: crate::graph::DEFAULT_WIDTH,
                    latency: 0,
                    params: Default::default(),
                })
                .collect(),
            edges: edges
                .iter()
                .map(|(s, d, p, w)| EdgeDoc {
                    from: (s.to_string(), 0),
                    to: (d.to_string(), *p),
                    delay: *w,
                })
                .collect(),
            inputs: vec![],
            outputs: vec![],
        },
        boundary_inputs: None,
        boundary_outputs: None,
    };
    doc.to_pattern().expect("well-formed built-in pattern")
}
