use thiserror::Error;

use crate::graph::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),

    #[error("edge references unknown node `{0}`")]
    DanglingReference(String),

    #[error("node `{node}` ({kind}) has no {direction} port {port}")]
    BadPort {
        node: String,
        kind: &'static str,
        direction: &'static str,
        port: usize,
    },

    #[error("invalid graph: {}", join_violations(.0))]
    InvalidGraph(Vec<Violation>),

    #[error("zero-delay cycle through {}", .0.join(" -> "))]
    ZeroDelayCycle(Vec<String>),

    #[error("invalid pattern `{pattern}`: {reason}")]
    InvalidPattern { pattern: String, reason: String },

    #[error("class {class} (`{notation}`) needs {requested} disjoint instances but only {found} could be selected")]
    InfeasibleCount {
        class: usize,
        notation: String,
        requested: usize,
        found: usize,
    },

    #[error("invalid folding configuration: {0}")]
    InvalidConfig(String),

    #[error("core graph has a zero-delay cycle through {}", .0.join(" -> "))]
    CyclicCoreGraph(Vec<String>),

    #[error("no valid schedule with folding factor {0}")]
    InfeasibleFactor(u32),

    #[error("no valid schedule for any folding factor up to {cap}")]
    NoFeasibleFactor { cap: u32 },

    #[error("schedule violates constraints: {0}")]
    InvalidSchedule(String),

    #[error("select value {value} is out of range for a mod-{n} controller")]
    SelectOutOfRange { value: u32, n: u32 },

    #[error("cannot evaluate node kind `{0}` as an arithmetic operator")]
    UnknownOperator(&'static str),

    #[error("operator `{kind}` expects {expected} operands, got {got}")]
    Arity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("stimuli: {0}")]
    Stimuli(String),

    #[error("folded design metadata missing or inconsistent: {0}")]
    Metadata(String),

    #[error("no {table} entry for node kind `{kind}`")]
    MissingCostEntry { table: &'static str, kind: String },

    #[error("cost estimate has no folding breakdown")]
    MissingBreakdown,

    #[error("fixed-point format needs 0..=31 fraction bits, got {0}")]
    FracBits(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn syntax(err: serde_json::Error) -> Self {
        Error::Syntax {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }
}
