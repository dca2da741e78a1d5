//! Cycle-accurate, bit-exact simulation.
//!
//! Each cycle evaluates combinational nodes in topological order, then
//! updates every register (edge delays, `delay` nodes, counters). All
//! registers start at zero.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{FixedPointFormat, SineTable};
use crate::fold::FoldedDesign;
use crate::graph::{topo_order, validate, DataflowGraph, NodeIx, OpKind};

#[derive(Clone, Copy, Debug)]
enum Source {
    Wire(NodeIx),
    Reg(usize),
}

/// A graph compiled into flat evaluation tables plus its register state.
pub struct Simulator<'g> {
    graph: &'g DataflowGraph,
    fmt: FixedPointFormat,
    sine: SineTable,
    order: Vec<NodeIx>,
    sources: Vec<Vec<Source>>,
    values: Vec<i32>,
    state: Vec<i32>,
    rings: Vec<Ring>,
    ring_src: Vec<NodeIx>,
    outputs: Vec<i32>,
    cycle: u64,
}

struct Ring {
    buf: Vec<i32>,
    head: usize,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g DataflowGraph, fmt: FixedPointFormat) -> Result<Self> {
        let violations = validate(graph);
        if !violations.is_empty() {
            return Err(Error::InvalidGraph(violations));
        }
        let order = topo_order(graph)?
            .into_iter()
            .filter(|&i| {
                let k = graph.node(i).kind;
                !k.is_stateful() && !k.is_source()
            })
            .collect();
        let mut sources: Vec<Vec<Source>> = graph
            .nodes()
            .iter()
            .map(|n| vec![Source::Wire(0); n.num_inputs()])
            .collect();
        let mut rings = Vec::new();
        let mut ring_src = Vec::new();
        for e in graph.edges() {
            let src = if e.delay == 0 {
                Source::Wire(e.src.node)
            } else {
                rings.push(Ring {
                    buf: vec![0; e.delay as usize],
                    head: 0,
                });
                ring_src.push(e.src.node);
                Source::Reg(rings.len() - 1)
            };
            sources[e.dst.node][e.dst.port] = src;
        }
        Ok(Simulator {
            graph,
            fmt,
            sine: SineTable::new(fmt),
            order,
            sources,
            values: vec![0; graph.len()],
            state: vec![0; graph.len()],
            rings,
            ring_src,
            outputs: vec![0; graph.outputs().len()],
            cycle: 0,
        })
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    fn read(&self, s: Source) -> i32 {
        match s {
            Source::Wire(n) => self.values[n],
            Source::Reg(r) => {
                let ring = &self.rings[r];
                ring.buf[ring.head]
            }
        }
    }

    /// Advance one clock cycle. `inputs` follows the graph's input order;
    /// the returned slice follows its output order.
    pub fn step(&mut self, inputs: &[i32]) -> &[i32] {
        let g = self.graph;
        for (ix, node) in g.nodes().iter().enumerate() {
            if node.kind.is_stateful() {
                self.values[ix] = self.state[ix];
            }
        }
        for (k, &ix) in g.inputs().iter().enumerate() {
            self.values[ix] = inputs[k];
        }
        for i in 0..self.order.len() {
            let ix = self.order[i];
            let node = g.node(ix);
            let src = &self.sources[ix];
            let v = match node.kind {
                OpKind::Add => self.fmt.add(self.read(src[0]), self.read(src[1])),
                OpKind::Sub => self.fmt.sub(self.read(src[0]), self.read(src[1])),
                OpKind::Mult => self.fmt.mul(self.read(src[0]), self.read(src[1])),
                OpKind::Negate => self.fmt.neg(self.read(src[0])),
                OpKind::SineLut => self.sine.lookup(self.read(src[0])),
                OpKind::Output => self.read(src[0]),
                OpKind::Mux => {
                    let sel = self.read(src[0]) as u32 as usize;
                    let table = &node.params.select;
                    let data = table[sel % table.len()] as usize;
                    self.read(src[1 + data])
                }
                OpKind::Delay | OpKind::Counter | OpKind::Input | OpKind::ConstInput => {
                    unreachable!("not in evaluation order")
                }
            };
            self.values[ix] = v;
        }
        for (k, &ix) in g.outputs().iter().enumerate() {
            self.outputs[k] = self.values[ix];
        }
        for (ix, node) in g.nodes().iter().enumerate() {
            match node.kind {
                OpKind::Delay => self.state[ix] = self.read(self.sources[ix][0]),
                OpKind::Counter => {
                    let m = node.params.modulus.unwrap_or(1) as i64;
                    self.state[ix] = ((self.state[ix] as i64 + 1) % m) as i32;
                }
                _ => {}
            }
        }
        for (r, ring) in self.rings.iter_mut().enumerate() {
            ring.buf[ring.head] = self.values[self.ring_src[r]];
            ring.head = (ring.head + 1) % ring.buf.len();
        }
        self.cycle += 1;
        &self.outputs
    }
}

/// Per-input value sequences, keyed by input node id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimuli {
    pub columns: BTreeMap<String, Vec<i32>>,
}

impl Stimuli {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, input: &str, values: Vec<i32>) -> Self {
        self.columns.insert(input.to_string(), values);
        self
    }

    /// Longest stream length.
    pub fn len(&self) -> usize {
        self.columns.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Resolve one value stream per graph input. Missing `const-input`
    /// streams fall back to the node's `value` parameter.
    fn resolve(&self, graph: &DataflowGraph) -> Result<Vec<Vec<i32>>> {
        graph
            .inputs()
            .iter()
            .map(|&ix| {
                let node = graph.node(ix);
                match self.columns.get(&node.id) {
                    Some(v) if !v.is_empty() => Ok(v.clone()),
                    _ => match (node.kind, node.params.value) {
                        (OpKind::ConstInput, v) => Ok(vec![v.unwrap_or(0)]),
                        _ => Err(Error::Stimuli(format!("no values for input `{}`", node.id))),
                    },
                }
            })
            .collect()
    }

    /// Uniform random samples in [-1, 1) for every `input` node.
    pub fn random(graph: &DataflowGraph, fmt: FixedPointFormat, samples: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let one = fmt.one();
        let mut out = Stimuli::new();
        for &ix in graph.inputs() {
            if graph.node(ix).kind == OpKind::Input {
                let v = (0..samples).map(|_| rng.gen_range(-one..one)).collect();
                out.columns.insert(graph.id(ix).to_string(), v);
            }
        }
        out
    }

    /// 1.0 on the first sample of every `input`, zero afterwards.
    pub fn impulse(graph: &DataflowGraph, fmt: FixedPointFormat, samples: usize) -> Self {
        Self::shaped(graph, samples, |t| if t == 0 { fmt.one() } else { 0 })
    }

    /// Constant 1.0 on every `input`.
    pub fn step(graph: &DataflowGraph, fmt: FixedPointFormat, samples: usize) -> Self {
        Self::shaped(graph, samples, |_| fmt.one())
    }

    fn shaped(graph: &DataflowGraph, samples: usize, f: impl Fn(usize) -> i32) -> Self {
        let mut out = Stimuli::new();
        for &ix in graph.inputs() {
            if graph.node(ix).kind == OpKind::Input {
                out.columns
                    .insert(graph.id(ix).to_string(), (0..samples).map(&f).collect());
            }
        }
        out
    }

    /// Read CSV: a `cycle` column then one column per input. Values are
    /// decimal reals or `0x` raw words.
    pub fn read_csv(reader: impl Read, fmt: FixedPointFormat) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("cycle") {
            return Err(Error::Stimuli("first column must be `cycle`".into()));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut cols = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let cycle: usize = rec[0]
                .parse()
                .map_err(|_| Error::Stimuli(format!("row {}: bad cycle `{}`", row + 1, &rec[0])))?;
            if cycle != row {
                return Err(Error::Stimuli(format!(
                    "row {}: expected cycle {row}, found {cycle}",
                    row + 1
                )));
            }
            for (c, col) in cols.iter_mut().enumerate() {
                let field = rec.get(c + 1).unwrap_or("");
                col.push(parse_word(field, fmt).ok_or_else(|| {
                    Error::Stimuli(format!(
                        "row {}: bad value `{field}` for `{}`",
                        row + 1,
                        names[c]
                    ))
                })?);
            }
        }
        Ok(Stimuli {
            columns: names.into_iter().zip(cols).collect(),
        })
    }

    pub fn write_csv(&self, writer: impl Write, fmt: FixedPointFormat) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["cycle".to_string()];
        header.extend(self.columns.keys().cloned());
        w.write_record(&header)?;
        for t in 0..self.len() {
            let mut row = vec![t.to_string()];
            for col in self.columns.values() {
                let v = col.get(t).or(col.last()).copied().unwrap_or(0);
                row.push(format_word(v, fmt));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Parse a decimal real or a `0x` raw word.
pub fn parse_word(s: &str, fmt: FixedPointFormat) -> Option<i32> {
    let s = s.trim();
    if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        return u32::from_str_radix(hex, 16).ok().map(|u| u as i32);
    }
    fmt.from_real(s.parse::<f64>().ok()?)
}

/// Shortest decimal that parses back to the same word.
pub fn format_word(raw: i32, fmt: FixedPointFormat) -> String {
    format!("{}", fmt.to_real(raw))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracePort {
    pub name: String,
    pub samples: Vec<(u64, i32)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub ports: Vec<TracePort>,
    pub stimuli: Stimuli,
}

impl Trace {
    pub fn port(&self, name: &str) -> Option<&TracePort> {
        self.ports.iter().find(|p| p.name == name)
    }

    /// Raw values of one port in cycle order.
    pub fn values(&self, name: &str) -> Vec<i32> {
        self.port(name)
            .map(|p| p.samples.iter().map(|&(_, v)| v).collect())
            .unwrap_or_default()
    }

    /// Write CSV. When `frame` is `(n, offset)` a `valid` column marks the
    /// cycles at which a folded design presents a result.
    pub fn write_csv(
        &self,
        writer: impl Write,
        fmt: FixedPointFormat,
        frame: Option<(u32, u32)>,
    ) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["cycle".to_string()];
        header.extend(self.ports.iter().map(|p| p.name.clone()));
        if frame.is_some() {
            header.push("valid".into());
        }
        w.write_record(&header)?;
        let rows = self.ports.first().map_or(0, |p| p.samples.len());
        for r in 0..rows {
            let cycle = self.ports[0].samples[r].0;
            let mut row = vec![cycle.to_string()];
            for p in &self.ports {
                row.push(format_word(p.samples[r].1, fmt));
            }
            if let Some((n, offset)) = frame {
                let valid = cycle >= offset as u64 && (cycle - offset as u64).is_multiple_of(n as u64);
                row.push(if valid { "1" } else { "0" }.into());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run `graph` for `cycles` clock cycles. Streams shorter than `cycles`
/// hold their last value.
pub fn simulate(
    graph: &DataflowGraph,
    stimuli: &Stimuli,
    cycles: usize,
    fmt: FixedPointFormat,
) -> Result<Trace> {
    let streams = stimuli.resolve(graph)?;
    let mut sim = Simulator::new(graph, fmt)?;
    let mut ports: Vec<TracePort> = graph
        .outputs()
        .iter()
        .map(|&o| TracePort {
            name: graph.id(o).to_string(),
            samples: Vec::with_capacity(cycles),
        })
        .collect();
    let mut inputs = vec![0; streams.len()];
    for t in 0..cycles {
        for (k, s) in streams.iter().enumerate() {
            inputs[k] = *s
                .get(t)
                .unwrap_or_else(|| s.last().expect("non-empty stream"));
        }
        let out = sim.step(&inputs);
        for (p, &v) in ports.iter_mut().zip(out) {
            p.samples.push((t as u64, v));
        }
    }
    Ok(Trace {
        ports,
        stimuli: stimuli.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub sample: usize,
    pub output: String,
    pub expected: i32,
    pub actual: i32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub pass: bool,
    pub samples: usize,
    pub first_mismatch: Option<Mismatch>,
    pub latency_offset_used: u32,
    pub folding_factor: u32,
}

/// Compare a folded design against the original, one input vector per
/// frame of `N` cycles, reading folded outputs at `frame * N + offset`.
pub fn check_equivalence(
    original: &DataflowGraph,
    folded: &FoldedDesign,
    stimuli: &Stimuli,
    samples: usize,
    fmt: FixedPointFormat,
) -> Result<EquivalenceReport> {
    let n = folded.n;
    if n == 0 {
        return Err(Error::Metadata("folding factor is zero".into()));
    }
    let fg = &folded.graph;
    for &o in original.outputs() {
        if fg
            .ix(original.id(o))
            .is_none_or(|ix| !fg.outputs().contains(&ix))
        {
            return Err(Error::Metadata(format!(
                "folded design lacks output `{}`",
                original.id(o)
            )));
        }
    }
    let reference = simulate(original, stimuli, samples, fmt)?;
    let streams = stimuli.resolve(fg)?;
    let mut sim = Simulator::new(fg, fmt)?;
    let out_pos: Vec<usize> = reference
        .ports
        .iter()
        .map(|p| {
            let ix = fg.ix(&p.name).unwrap();
            fg.outputs().iter().position(|&o| o == ix).unwrap()
        })
        .collect();
    let offset = folded.latency_offset as usize;
    let n = n as usize;
    let mut inputs = vec![0; streams.len()];
    let mut report = EquivalenceReport {
        pass: true,
        samples,
        first_mismatch: None,
        latency_offset_used: folded.latency_offset,
        folding_factor: folded.n,
    };
    if samples == 0 {
        return Ok(report);
    }
    let cycles = n * (samples - 1) + offset + 1;
    for t in 0..cycles {
        let frame = t / n;
        for (k, s) in streams.iter().enumerate() {
            inputs[k] = *s
                .get(frame)
                .unwrap_or_else(|| s.last().expect("non-empty stream"));
        }
        let out = sim.step(&inputs);
        if t >= offset && (t - offset).is_multiple_of(n) {
            let l = (t - offset) / n;
            for (p, port) in reference.ports.iter().enumerate() {
                let expected = port.samples[l].1;
                let actual = out[out_pos[p]];
                if expected != actual {
                    report.pass = false;
                    report.first_mismatch = Some(Mismatch {
                        sample: l,
                        output: port.name.clone(),
                        expected,
                        actual,
                    });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}
