//! Folding of synchronous dataflow graphs onto shared hardware.
//!
//! A graph is covered by classes of isomorphic subcircuits (folding cores),
//! each class is time-multiplexed onto one physical unit, and the folded
//! circuit is checked cycle by cycle against the original.

pub mod bench;
pub mod cost;
pub mod doc;
pub mod error;
pub mod fixed;
pub mod fold;
pub mod graph;
pub mod pattern;
pub mod schedule;
pub mod sim;

pub use cost::{
    estimate_cost, explore, folding_benefit, CostEstimate, CostWeights, DelayTable, ExplorationRow,
};
pub use doc::{parse_graph, serialize_graph};
pub use error::{Error, Result};
pub use fixed::FixedPointFormat;
pub use fold::{fold, fold_config, FoldedDesign};
pub use graph::{DataflowGraph, GraphBuilder, OpKind};
pub use pattern::{match_pattern, resolve_config, ConfigDoc, CorePattern, FoldingConfig};
pub use schedule::{
    build_core_graph, folding_delay, list_schedule, verify_schedule, CoreGraph, Schedule,
};
pub use sim::{check_equivalence, simulate, EquivalenceReport, Stimuli, Trace};
