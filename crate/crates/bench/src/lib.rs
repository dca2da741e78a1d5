//! Shared fixtures for the criterion benches.

use dfgfold_core::bench::Bench;
use dfgfold_core::{resolve_config, DataflowGraph, FixedPointFormat, FoldingConfig};

/// A benchmark circuit with one of its shipped configurations, resolved.
pub fn fixture(bench: Bench, config: &str) -> (DataflowGraph, FoldingConfig) {
    let g = bench.generate(FixedPointFormat::default());
    let doc = bench
        .configs()
        .into_iter()
        .find(|(name, _)| name == config)
        .unwrap_or_else(|| panic!("{bench} has no configuration {config}"))
        .1;
    let cfg = resolve_config(&g, &doc, None).expect("shipped configurations resolve");
    (g, cfg)
}
