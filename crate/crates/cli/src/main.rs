//! `dfgfold`: generate benchmark circuits, match folding cores, schedule,
//! fold, simulate, verify and explore from the command line.
//!
//! Exit status is 0 on success, 1 on a user error (bad flags, unreadable or
//! malformed files, infeasible requests) and 2 when equivalence checking
//! finds a mismatch.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use dfgfold_core::bench::{default_fir_coefficients, gen_fir, Bench};
use dfgfold_core::cost::{
    estimate_cost, explore, folding_benefit, gnuplot_script, write_csv, CostWeights, DelayTable,
    ExploreOptions, NamedConfig,
};
use dfgfold_core::fold::{fold, FoldedDesign};
use dfgfold_core::pattern::{
    instance_map, match_pattern, select_cover, ClassDoc, ConfigDoc, CorePattern, PatternRef,
};
use dfgfold_core::schedule::{build_core_graph, list_schedule, ScheduleReport};
use dfgfold_core::sim::{check_equivalence, simulate, EquivalenceReport, Stimuli};
use dfgfold_core::{
    parse_graph, resolve_config, serialize_graph, DataflowGraph, FixedPointFormat, OpKind,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dfgfold", version, about = "Dataflow-graph folding toolchain")]
struct Cli {
    /// Seed for generated random stimuli.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Fractional bits of the fixed-point word.
    #[arg(long, global = true, default_value_t = 16)]
    frac_bits: u32,
    /// JSON weight table (kind -> lut units); entries override the defaults.
    #[arg(long, global = true, env = "DFGFOLD_WEIGHTS")]
    weights: Option<PathBuf>,
    /// JSON delay table (kind -> ns); entries override the defaults.
    #[arg(long, global = true)]
    delays: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a benchmark circuit as a graph document.
    Gen(GenArgs),
    /// List the embeddings of a folding core, or select disjoint ones.
    Match(MatchArgs),
    /// Schedule a configuration and report slots and folding delays.
    Schedule(ScheduleArgs),
    /// Fold a circuit; writes the folded graph and its metadata.
    Fold(FoldArgs),
    /// Simulate a graph and write the output trace as CSV.
    Simulate(SimulateArgs),
    /// Check a folded design against the original.
    Verify(VerifyArgs),
    /// Fold, verify and cost every configuration in a directory.
    Explore(ExploreArgs),
    /// Structural cost estimate of a graph or folded design.
    Cost(CostArgs),
}

#[derive(Args)]
struct GenArgs {
    /// fir, iir, pct, tpid or pi.
    bench: Bench,
    /// FIR tap count.
    #[arg(long)]
    taps: Option<usize>,
    /// Output file instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write graph.json, stimuli.csv and the shipped configurations
    /// under configs/ into this directory.
    #[arg(long, value_name = "DIR")]
    with_stimuli: Option<PathBuf>,
    /// Random samples in the written stimuli.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Pattern document, or an operator kind such as `mult`.
    #[arg(long)]
    pattern: String,
    /// Select this many disjoint instances and print a configuration.
    #[arg(long)]
    count: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Source {
    #[arg(long)]
    graph: PathBuf,
    /// Folding configuration document.
    #[arg(long)]
    config: PathBuf,
    /// Folding factor to try first.
    #[arg(long = "n")]
    n: Option<u32>,
}

#[derive(Args)]
struct ScheduleArgs {
    #[command(flatten)]
    src: Source,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FoldArgs {
    #[command(flatten)]
    src: Source,
    /// Use the slots of a schedule report instead of scheduling.
    #[arg(long, conflicts_with = "n")]
    schedule: Option<PathBuf>,
    /// Folded graph document.
    #[arg(short, long)]
    output: PathBuf,
    /// Metadata sidecar; defaults to the output with `.meta.json`.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct StimulusArgs {
    /// Stimuli CSV (`cycle` column then one column per input).
    #[arg(long, conflicts_with_all = ["random", "impulse", "step"])]
    stimuli: Option<PathBuf>,
    /// Seeded uniform random samples.
    #[arg(long, value_name = "SAMPLES")]
    random: Option<usize>,
    #[arg(long, value_name = "SAMPLES")]
    impulse: Option<usize>,
    #[arg(long, value_name = "SAMPLES")]
    step: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Metadata of a folded graph: each sample is held for a frame of N
    /// cycles and the trace gains a `valid` column.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[command(flatten)]
    stim: StimulusArgs,
    /// Cycles to run; defaults to the whole stimulus.
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    original: PathBuf,
    /// Configuration to fold and check.
    #[arg(long, required_unless_present = "folded", conflicts_with = "folded")]
    config: Option<PathBuf>,
    /// Folded graph document to check, with its `.meta.json` sidecar.
    #[arg(long)]
    folded: Option<PathBuf>,
    #[arg(long, requires = "folded")]
    meta: Option<PathBuf>,
    #[arg(long = "n", requires = "config")]
    n: Option<u32>,
    /// Random samples; impulse and step runs of 64 samples are added.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Check this stimulus only.
    #[arg(long)]
    stimuli: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Directory of configuration documents (*.json).
    #[arg(long)]
    configs: PathBuf,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// CSV report; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Full JSON report with cost breakdowns.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Gnuplot script plotting lut units over latency proxy; needs --csv.
    #[arg(long, requires = "csv")]
    emit_gnuplot: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Metadata of a folded graph, for the breakdown.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Original circuit, to evaluate the folding benefit.
    #[arg(long, requires = "meta")]
    original: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// A run that completed but found the designs inequivalent.
struct Mismatch;

type Outcome = anyhow::Result<Result<(), Mismatch>>;

struct Ctx {
    seed: u64,
    fmt: FixedPointFormat,
    weights: CostWeights,
    delays: DelayTable,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Mismatch)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let fmt = FixedPointFormat::new(cli.frac_bits)?;
    let mut weights = CostWeights::default();
    if let Some(p) = &cli.weights {
        let table = CostWeights::parse(&read(p)?)
            .with_context(|| format!("weight table {}", p.display()))?;
        weights.0.extend(table.0);
    }
    let mut delays = DelayTable::default();
    if let Some(p) = &cli.delays {
        let table =
            DelayTable::parse(&read(p)?).with_context(|| format!("delay table {}", p.display()))?;
        delays.0.extend(table.0);
    }
    let ctx = Ctx {
        seed: cli.seed,
        fmt,
        weights,
        delays,
    };
    match cli.cmd {
        Cmd::Gen(a) => gen(&ctx, a),
        Cmd::Match(a) => matches(a),
        Cmd::Schedule(a) => schedule(a),
        Cmd::Fold(a) => fold_cmd(a),
        Cmd::Simulate(a) => simulate_cmd(&ctx, a),
        Cmd::Verify(a) => verify(&ctx, a),
        Cmd::Explore(a) => explore_cmd(&ctx, a),
        Cmd::Cost(a) => cost(&ctx, a),
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn load_graph(path: &Path) -> anyhow::Result<DataflowGraph> {
    parse_graph(&read(path)?).with_context(|| format!("graph {}", path.display()))
}

fn load_config(path: &Path) -> anyhow::Result<ConfigDoc> {
    ConfigDoc::parse(&read(path)?).with_context(|| format!("config {}", path.display()))
}

fn default_meta_path(graph: &Path) -> PathBuf {
    let stem = graph
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    graph.with_file_name(format!("{stem}.meta.json"))
}

fn load_folded(graph: &Path, meta: Option<&Path>) -> anyhow::Result<FoldedDesign> {
    let meta = meta
        .map(Path::to_path_buf)
        .unwrap_or_else(|| default_meta_path(graph));
    let m = FoldedDesign::parse_meta(&read(&meta)?)
        .with_context(|| format!("metadata {}", meta.display()))?;
    Ok(FoldedDesign::from_parts(load_graph(graph)?, m)?)
}

fn gen(ctx: &Ctx, a: GenArgs) -> Outcome {
    let graph = match (a.bench, a.taps) {
        (Bench::Fir, Some(t)) => gen_fir(t, &default_fir_coefficients(t, ctx.fmt))?,
        (Bench::Fir, None) => a.bench.generate(ctx.fmt),
        (b, Some(_)) => bail!("--taps applies to fir only, not {b}"),
        (b, None) => b.generate(ctx.fmt),
    };
    let text = serialize_graph(&graph) + "\n";
    write_out(a.output.as_deref(), &text)?;
    if let Some(dir) = a.with_stimuli {
        let configs = dir.join("configs");
        fs::create_dir_all(&configs)
            .with_context(|| format!("cannot create {}", configs.display()))?;
        fs::write(dir.join("graph.json"), &text)?;
        let mut buf = Vec::new();
        Stimuli::random(&graph, ctx.fmt, a.samples, ctx.seed).write_csv(&mut buf, ctx.fmt)?;
        fs::write(dir.join("stimuli.csv"), buf)?;
        if a.taps.is_none_or(|t| t == 16) {
            for (name, doc) in a.bench.configs() {
                fs::write(configs.join(format!("{name}.json")), doc.to_json() + "\n")?;
            }
        } else {
            eprintln!("note: shipped configurations target the 16-tap FIR; none written");
        }
    }
    Ok(Ok(()))
}

fn load_pattern(arg: &str) -> anyhow::Result<CorePattern> {
    if let Some(kind) = OpKind::from_name(arg) {
        return Ok(CorePattern::single(kind)?);
    }
    let path = Path::new(arg);
    CorePattern::parse(&read(path)?).with_context(|| format!("pattern {}", path.display()))
}

fn matches(a: MatchArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    let pattern = load_pattern(&a.pattern)?;
    let found = match_pattern(&graph, &pattern);
    let text = match a.count {
        None => {
            let maps: Vec<_> = found
                .iter()
                .map(|i| instance_map(&graph, &pattern, i))
                .collect();
            json(&maps)
        }
        Some(k) => {
            let cfg = select_cover(&[(pattern.clone(), found)], &[k])?;
            let doc = ConfigDoc {
                name: Some(format!("{k}{}", pattern.multiset())),
                classes: vec![ClassDoc {
                    pattern: PatternRef::Inline(Box::new(pattern.to_doc())),
                    count: k,
                    instances: Some(
                        cfg.classes[0]
                            .instances
                            .iter()
                            .map(|i| instance_map(&graph, &pattern, i))
                            .collect(),
                    ),
                }],
            };
            doc.to_json() + "\n"
        }
    };
    write_out(a.output.as_deref(), &text)?;
    Ok(Ok(()))
}

fn schedule(a: ScheduleArgs) -> Outcome {
    let graph = load_graph(&a.src.graph)?;
    let doc = load_config(&a.src.config)?;
    let cfg = resolve_config(&graph, &doc, a.src.config.parent())?;
    let core = build_core_graph(&graph, &cfg)?;
    let s = list_schedule(&core, a.src.n)?;
    write_out(a.output.as_deref(), &json(&ScheduleReport::new(&core, &s)))?;
    Ok(Ok(()))
}

fn fold_cmd(a: FoldArgs) -> Outcome {
    let graph = load_graph(&a.src.graph)?;
    let doc = load_config(&a.src.config)?;
    let cfg = resolve_config(&graph, &doc, a.src.config.parent())?;
    let core = build_core_graph(&graph, &cfg)?;
    let s = match &a.schedule {
        Some(p) => {
            let report: ScheduleReport = serde_json::from_str(&read(p)?)
                .with_context(|| format!("schedule report {}", p.display()))?;
            report.to_schedule(&core)?
        }
        None => list_schedule(&core, a.src.n)?,
    };
    let folded = fold(&core, &s)?;
    write_out(Some(&a.output), &(serialize_graph(&folded.graph) + "\n"))?;
    let meta = a.meta.unwrap_or_else(|| default_meta_path(&a.output));
    write_out(Some(&meta), &(folded.meta_json() + "\n"))?;
    Ok(Ok(()))
}

fn stimuli(ctx: &Ctx, graph: &DataflowGraph, a: &StimulusArgs) -> anyhow::Result<Stimuli> {
    Ok(match (&a.stimuli, a.random, a.impulse, a.step) {
        (Some(p), ..) => {
            let file = fs::File::open(p).with_context(|| format!("cannot read {}", p.display()))?;
            Stimuli::read_csv(file, ctx.fmt).with_context(|| format!("stimuli {}", p.display()))?
        }
        (None, Some(n), None, None) => Stimuli::random(graph, ctx.fmt, n, ctx.seed),
        (None, None, Some(n), None) => Stimuli::impulse(graph, ctx.fmt, n),
        (None, None, None, Some(n)) => Stimuli::step(graph, ctx.fmt, n),
        _ => bail!("give exactly one of --stimuli, --random, --impulse or --step"),
    })
}

fn simulate_cmd(ctx: &Ctx, a: SimulateArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    let stim = stimuli(ctx, &graph, &a.stim)?;
    let mut buf = Vec::new();
    match &a.meta {
        None => {
            let cycles = a.cycles.unwrap_or(stim.len());
            simulate(&graph, &stim, cycles, ctx.fmt)?.write_csv(&mut buf, ctx.fmt, None)?;
        }
        Some(m) => {
            let meta = FoldedDesign::parse_meta(&read(m)?)
                .with_context(|| format!("metadata {}", m.display()))?;
            let n = meta.n as usize;
            let mut framed = Stimuli::new();
            for (k, v) in &stim.columns {
                framed = framed.with(
                    k,
                    v.iter().flat_map(|&x| std::iter::repeat_n(x, n)).collect(),
                );
            }
            let cycles = a
                .cycles
                .unwrap_or(framed.len() + meta.latency_offset as usize);
            simulate(&graph, &framed, cycles, ctx.fmt)?.write_csv(
                &mut buf,
                ctx.fmt,
                Some((meta.n, meta.latency_offset)),
            )?;
        }
    }
    write_out(a.output.as_deref(), &String::from_utf8(buf)?)?;
    Ok(Ok(()))
}

#[derive(Serialize)]
struct VerifyRun {
    stimulus: String,
    #[serde(flatten)]
    report: EquivalenceReport,
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    #[serde(rename = "N")]
    n: u32,
    latency_offset: u32,
    notation: String,
    runs: Vec<VerifyRun>,
}

fn verify(ctx: &Ctx, a: VerifyArgs) -> Outcome {
    let original = load_graph(&a.original)?;
    let folded = match (&a.config, &a.folded) {
        (Some(c), _) => {
            let doc = load_config(c)?;
            let cfg = resolve_config(&original, &doc, c.parent())?;
            let core = build_core_graph(&original, &cfg)?;
            fold(&core, &list_schedule(&core, a.n)?)?
        }
        (None, Some(f)) => load_folded(f, a.meta.as_deref())?,
        (None, None) => return Err(anyhow!("give --config or --folded")),
    };
    let mut runs = Vec::new();
    let mut check = |name: &str, stim: Stimuli| -> anyhow::Result<()> {
        let len = stim.len();
        let report = check_equivalence(&original, &folded, &stim, len, ctx.fmt)?;
        runs.push(VerifyRun {
            stimulus: name.to_string(),
            report,
        });
        Ok(())
    };
    match &a.stimuli {
        Some(p) => {
            let file = fs::File::open(p).with_context(|| format!("cannot read {}", p.display()))?;
            check("file", Stimuli::read_csv(file, ctx.fmt)?)?;
        }
        None => {
            check(
                "random",
                Stimuli::random(&original, ctx.fmt, a.samples, ctx.seed),
            )?;
            check("impulse", Stimuli::impulse(&original, ctx.fmt, 64))?;
            check("step", Stimuli::step(&original, ctx.fmt, 64))?;
        }
    }
    let pass = runs.iter().all(|r| r.report.pass);
    let report = VerifyReport {
        pass,
        n: folded.n,
        latency_offset: folded.latency_offset,
        notation: folded.notation.clone(),
        runs,
    };
    write_out(a.output.as_deref(), &json(&report))?;
    if !pass {
        eprintln!("verification failed");
        return Ok(Err(Mismatch));
    }
    Ok(Ok(()))
}

fn load_config_dir(dir: &Path) -> anyhow::Result<Vec<NamedConfig>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no *.json configurations in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            Ok(NamedConfig {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                doc: load_config(p)?,
                base: Some(dir.to_path_buf()),
            })
        })
        .collect()
}

fn explore_cmd(ctx: &Ctx, a: ExploreArgs) -> Outcome {
    let graph = load_graph(&a.graph)?;
    let configs = load_config_dir(&a.configs)?;
    let opts = ExploreOptions {
        samples: a.samples,
        seed: ctx.seed,
        fmt: ctx.fmt,
        weights: ctx.weights.clone(),
        delays: ctx.delays.clone(),
    };
    let rows = explore(&graph, &configs, &opts)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    write_out(a.csv.as_deref(), &String::from_utf8(buf)?)?;
    if let Some(p) = &a.json {
        write_out(Some(p), &json(&rows))?;
    }
    if let (Some(script), Some(csv)) = (&a.emit_gnuplot, &a.csv) {
        write_out(
            Some(script),
            &gnuplot_script(&csv.to_string_lossy(), &graph.name),
        )?;
    }
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{}: {}", r.config, r.error.as_deref().unwrap_or_default());
    }
    Ok(Ok(()))
}

#[derive(Serialize)]
struct CostReport {
    #[serde(flatten)]
    cost: dfgfold_core::CostEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    original: Option<dfgfold_core::CostEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    benefit: Option<dfgfold_core::cost::Benefit>,
}

fn cost(ctx: &Ctx, a: CostArgs) -> Outcome {
    let report = match &a.meta {
        None => CostReport {
            cost: estimate_cost(&load_graph(&a.graph)?, None, &ctx.weights, &ctx.delays)?,
            original: None,
            benefit: None,
        },
        Some(m) => {
            let folded = load_folded(&a.graph, Some(m))?;
            let cost = estimate_cost(
                &folded.graph,
                Some(&folded.provenance),
                &ctx.weights,
                &ctx.delays,
            )?;
            let (original, benefit) = match &a.original {
                Some(p) => {
                    let o = estimate_cost(&load_graph(p)?, None, &ctx.weights, &ctx.delays)?;
                    let b = folding_benefit(&o, &cost, &folded.class_counts)?;
                    (Some(o), Some(b))
                }
                None => (None, None),
            };
            CostReport {
                cost,
                original,
                benefit,
            }
        }
    };
    write_out(a.output.as_deref(), &json(&report))?;
    Ok(Ok(()))
}
