//! Structural cost proxies, the folding benefit condition and design-space
//! exploration with Pareto reporting.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointFormat;
use crate::fold::{fold_config, Bucket, FoldedDesign, Provenance};
use crate::graph::{topo_order, DataflowGraph, OpKind};
use crate::pattern::{resolve_config, ConfigDoc};
use crate::sim::{check_equivalence, Stimuli};

/// Area weight per node kind, in lut units. `delay` is charged per
/// register bit and `mux` per data input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostWeights(pub BTreeMap<String, u64>);

impl Default for CostWeights {
    fn default() -> Self {
        let w = [
            (OpKind::Add, 32),
            (OpKind::Sub, 32),
            (OpKind::Negate, 32),
            (OpKind::Mult, 0),
            (OpKind::Mux, 16),
            (OpKind::SineLut, 256),
            (OpKind::Counter, 8),
            (OpKind::Delay, 1),
            (OpKind::ConstInput, 0),
            (OpKind::Input, 0),
            (OpKind::Output, 0),
        ];
        CostWeights(w.iter().map(|(k, v)| (k.name().to_string(), *v)).collect())
    }
}

/// Propagation delay per node kind, in ns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DelayTable(pub BTreeMap<String, f64>);

impl Default for DelayTable {
    fn default() -> Self {
        let d = [
            (OpKind::Add, 2.5),
            (OpKind::Sub, 2.5),
            (OpKind::Negate, 2.5),
            (OpKind::Mult, 6.0),
            (OpKind::Mux, 1.0),
            (OpKind::SineLut, 3.0),
            (OpKind::Counter, 0.0),
            (OpKind::Delay, 0.0),
            (OpKind::ConstInput, 0.0),
            (OpKind::Input, 0.0),
            (OpKind::Output, 0.0),
        ];
        DelayTable(d.iter().map(|(k, v)| (k.name().to_string(), *v)).collect())
    }
}

impl CostWeights {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::syntax)
    }

    fn get(&self, kind: OpKind) -> Result<u64> {
        self.0
            .get(kind.name())
            .copied()
            .ok_or_else(|| Error::MissingCostEntry {
                table: "weights",
                kind: kind.name().to_string(),
            })
    }
}

impl DelayTable {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::syntax)
    }

    fn get(&self, kind: OpKind) -> Result<f64> {
        self.0
            .get(kind.name())
            .copied()
            .ok_or_else(|| Error::MissingCostEntry {
                table: "delays",
                kind: kind.name().to_string(),
            })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Breakdown {
    pub folding_core: u64,
    pub remain: u64,
    pub overhead: u64,
    /// Folding-core share of each config class's unit.
    pub class_core: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub mult_units: u64,
    pub lut_units: u64,
    pub reg_bits: u64,
    pub mux_inputs: u64,
    pub tmin_proxy_ns: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakdown: Option<Breakdown>,
}

/// Weighted census of `graph`. With provenance, every node's cost is also
/// attributed to its breakdown bucket; edge delays count toward the bucket
/// of the node they enter.
pub fn estimate_cost(
    graph: &DataflowGraph,
    provenance: Option<&BTreeMap<String, Provenance>>,
    weights: &CostWeights,
    delays: &DelayTable,
) -> Result<CostEstimate> {
    let reg_w = weights.get(OpKind::Delay)?;
    let mut est = CostEstimate {
        mult_units: 0,
        lut_units: 0,
        reg_bits: 0,
        mux_inputs: 0,
        tmin_proxy_ns: 0.0,
        breakdown: provenance.map(|_| Breakdown::default()),
    };
    let mut node_cost = vec![0u64; graph.len()];
    for (ix, n) in graph.nodes().iter().enumerate() {
        let w = weights.get(n.kind)?;
        node_cost[ix] = match n.kind {
            OpKind::Delay => {
                est.reg_bits += n.width as u64;
                n.width as u64 * w
            }
            OpKind::Mux => {
                let k = n.params.inputs.unwrap_or(0) as u64;
                est.mux_inputs += k;
                k * w
            }
            OpKind::Mult => {
                est.mult_units += 1;
                w
            }
            _ => w,
        };
    }
    for e in graph.edges() {
        if e.delay > 0 {
            let bits = e.delay as u64 * graph.node(e.src.node).width as u64;
            est.reg_bits += bits;
            node_cost[e.dst.node] += bits * reg_w;
        }
    }
    est.lut_units = node_cost.iter().sum();
    if let (Some(prov), Some(bd)) = (provenance, est.breakdown.as_mut()) {
        for (ix, n) in graph.nodes().iter().enumerate() {
            let p = prov
                .get(&n.id)
                .ok_or_else(|| Error::Metadata(format!("no provenance for node `{}`", n.id)))?;
            let c = node_cost[ix];
            match p.bucket {
                Bucket::FoldingCore => {
                    bd.folding_core += c;
                    if let Some(k) = p.class {
                        if bd.class_core.len() <= k {
                            bd.class_core.resize(k + 1, 0);
                        }
                        bd.class_core[k] += c;
                    }
                }
                Bucket::Remain => bd.remain += c,
                Bucket::Overhead => bd.overhead += c,
            }
        }
    }
    est.tmin_proxy_ns = tmin_proxy(graph, delays)?;
    Ok(est)
}

/// Longest register-to-register combinational path, in ns.
pub fn tmin_proxy(graph: &DataflowGraph, delays: &DelayTable) -> Result<f64> {
    let order = topo_order(graph)?;
    let mut arrival = vec![0f64; graph.len()];
    let mut worst = 0f64;
    for &u in &order {
        let start = graph
            .in_edges(u)
            .iter()
            .filter(|&&e| graph.is_combinational(e))
            .map(|&e| arrival[graph.edge(e).src.node])
            .fold(0f64, f64::max);
        arrival[u] = start + delays.get(graph.node(u).kind)?;
        worst = worst.max(arrival[u]);
    }
    Ok(worst)
}

/// Cost of a folded design, with its breakdown.
pub fn estimate_folded(
    design: &FoldedDesign,
    weights: &CostWeights,
    delays: &DelayTable,
) -> Result<CostEstimate> {
    estimate_cost(&design.graph, Some(&design.provenance), weights, delays)
}

/// `sum (count_k - 1) * core_k`: the saving folding can at most achieve.
pub fn overhead_bound(terms: &[(usize, u64)]) -> u64 {
    terms
        .iter()
        .map(|&(count, core)| count.saturating_sub(1) as u64 * core)
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benefit {
    /// `S_f < S_o`.
    pub beneficial: bool,
    /// `S_o - S_f`.
    pub margin: i64,
    pub overhead: u64,
    /// `sum (count_k - 1) * core_k`.
    pub bound: u64,
    /// `overhead < bound`.
    pub overhead_below_bound: bool,
    /// `sum count_k * core_k + remain == S_o`.
    pub decomposition_holds: bool,
    /// Both formulations give the same verdict.
    pub agree: bool,
}

/// Compare the folded design against the original. The overhead form is
/// generalized to several classes with their own instance counts.
pub fn folding_benefit(
    original: &CostEstimate,
    folded: &CostEstimate,
    class_counts: &[usize],
) -> Result<Benefit> {
    let bd = folded.breakdown.as_ref().ok_or(Error::MissingBreakdown)?;
    let core = |k: usize| bd.class_core.get(k).copied().unwrap_or(0);
    let terms: Vec<(usize, u64)> = class_counts
        .iter()
        .enumerate()
        .map(|(k, &c)| (c, core(k)))
        .collect();
    let s_o = original.lut_units;
    let s_f = folded.lut_units;
    let bound = overhead_bound(&terms);
    let beneficial = s_f < s_o;
    let overhead_below_bound = bd.overhead < bound;
    let unfolded: u64 = terms.iter().map(|&(c, s)| c as u64 * s).sum::<u64>() + bd.remain;
    Ok(Benefit {
        beneficial,
        margin: s_o as i64 - s_f as i64,
        overhead: bd.overhead,
        bound,
        overhead_below_bound,
        decomposition_holds: unfolded == s_o,
        agree: beneficial == overhead_below_bound,
    })
}

/// A named configuration document; pattern file references resolve
/// relative to `base`.
#[derive(Clone, Debug)]
pub struct NamedConfig {
    pub name: String,
    pub doc: ConfigDoc,
    pub base: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ExploreOptions {
    pub samples: usize,
    pub seed: u64,
    pub fmt: FixedPointFormat,
    pub weights: CostWeights,
    pub delays: DelayTable,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            samples: 1000,
            seed: 1,
            fmt: FixedPointFormat::default(),
            weights: CostWeights::default(),
            delays: DelayTable::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplorationRow {
    pub config: String,
    pub notation: String,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub cost: Option<CostEstimate>,
    pub latency_proxy_ns: Option<f64>,
    pub equivalent: bool,
    pub pareto: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benefit: Option<Benefit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Resolve, schedule, fold, verify and cost one configuration.
pub fn evaluate(
    graph: &DataflowGraph,
    original: &CostEstimate,
    cfg: &NamedConfig,
    opts: &ExploreOptions,
) -> ExplorationRow {
    let mut row = ExplorationRow {
        config: cfg.name.clone(),
        notation: String::new(),
        n: None,
        cost: None,
        latency_proxy_ns: None,
        equivalent: false,
        pareto: false,
        benefit: None,
        error: None,
    };
    let run = |row: &mut ExplorationRow| -> Result<()> {
        let config = resolve_config(graph, &cfg.doc, cfg.base.as_deref())?;
        row.notation = config.notation();
        let (_, _, folded) = fold_config(graph, &config, None)?;
        row.n = Some(folded.n);
        let cost = estimate_folded(&folded, &opts.weights, &opts.delays)?;
        row.latency_proxy_ns = Some(folded.n as f64 * cost.tmin_proxy_ns);
        row.benefit = Some(folding_benefit(original, &cost, &folded.class_counts)?);
        row.cost = Some(cost);
        let stimuli = [
            (
                Stimuli::random(graph, opts.fmt, opts.samples, opts.seed),
                opts.samples,
            ),
            (Stimuli::impulse(graph, opts.fmt, 64), 64),
            (Stimuli::step(graph, opts.fmt, 64), 64),
        ];
        row.equivalent = true;
        for (s, len) in &stimuli {
            let report = check_equivalence(graph, &folded, s, *len, opts.fmt)?;
            if !report.pass {
                row.equivalent = false;
                let m = report.first_mismatch.unwrap();
                row.error = Some(format!(
                    "output {} differs at sample {}: expected {}, got {}",
                    m.output, m.sample, m.expected, m.actual
                ));
                break;
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut row) {
        row.equivalent = false;
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluate every configuration in parallel. Rows come back sorted by
/// (lut_units, latency_proxy, config), failed rows last, with the Pareto
/// front of equivalence-passing rows flagged.
pub fn explore(
    graph: &DataflowGraph,
    configs: &[NamedConfig],
    opts: &ExploreOptions,
) -> Result<Vec<ExplorationRow>> {
    let original = estimate_cost(graph, None, &opts.weights, &opts.delays)?;
    let mut rows: Vec<ExplorationRow> = configs
        .par_iter()
        .map(|c| evaluate(graph, &original, c, opts))
        .collect();
    rows.sort_by(|a, b| {
        let key = |r: &ExplorationRow| (r.cost.is_none(), r.cost.as_ref().map(|c| c.lut_units));
        key(a)
            .cmp(&key(b))
            .then_with(|| {
                a.latency_proxy_ns
                    .unwrap_or(f64::INFINITY)
                    .total_cmp(&b.latency_proxy_ns.unwrap_or(f64::INFINITY))
            })
            .then_with(|| a.config.cmp(&b.config))
    });
    for ix in pareto(&rows) {
        rows[ix].pareto = true;
    }
    Ok(rows)
}

/// A point for Pareto filtering: lower is better on both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct ParetoPoint {
    pub lut_units: u64,
    pub latency: f64,
    pub key: String,
}

/// Indices of the non-dominated points, sorted by latency. Of several
/// identical points only the first by key is kept.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (&points[a], &points[b]);
        p.latency
            .total_cmp(&q.latency)
            .then(p.lut_units.cmp(&q.lut_units))
            .then_with(|| p.key.cmp(&q.key))
    });
    let mut best = u64::MAX;
    let mut front = Vec::new();
    for ix in order {
        if points[ix].lut_units < best {
            best = points[ix].lut_units;
            front.push(ix);
        }
    }
    front
}

/// Pareto front over the equivalence-passing rows, as row indices sorted
/// by latency proxy.
pub fn pareto(rows: &[ExplorationRow]) -> Vec<usize> {
    let eligible: Vec<usize> = (0..rows.len())
        .filter(|&i| {
            rows[i].equivalent && rows[i].cost.is_some() && rows[i].latency_proxy_ns.is_some()
        })
        .collect();
    let points: Vec<ParetoPoint> = eligible
        .iter()
        .map(|&i| ParetoPoint {
            lut_units: rows[i].cost.as_ref().unwrap().lut_units,
            latency: rows[i].latency_proxy_ns.unwrap(),
            key: rows[i].notation.clone(),
        })
        .collect();
    pareto_front(&points)
        .into_iter()
        .map(|k| eligible[k])
        .collect()
}

pub const CSV_HEADER: [&str; 10] = [
    "config",
    "N",
    "mult_units",
    "lut_units",
    "reg_bits",
    "mux_inputs",
    "tmin_proxy_ns",
    "latency_proxy_ns",
    "equivalent",
    "pareto",
];

pub fn write_csv(rows: &[ExplorationRow], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let c = r.cost.as_ref();
        let num = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let ns = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_default();
        w.write_record([
            r.config.clone(),
            num(r.n.map(u64::from)),
            num(c.map(|c| c.mult_units)),
            num(c.map(|c| c.lut_units)),
            num(c.map(|c| c.reg_bits)),
            num(c.map(|c| c.mux_inputs)),
            ns(c.map(|c| c.tmin_proxy_ns)),
            ns(r.latency_proxy_ns),
            r.equivalent.to_string(),
            r.pareto.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Gnuplot script plotting lut_units over latency proxy with the front.
pub fn gnuplot_script(csv_path: &str, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set title '{title}'\n\
         set xlabel 'N * tmin proxy [ns]'\n\
         set ylabel 'lut units'\n\
         plot '{csv_path}' using 8:4 with points pt 7 title 'designs', \\\n\
         \x20    '< (head -n1 {csv_path}; grep \",true$\" {csv_path})' using 8:4 with linespoints dt 2 title 'pareto front'\n"
    )
}
