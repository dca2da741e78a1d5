//! JSON graph documents.
//!
//! ```json
//! {"name": "g",
//!  "nodes": [{"id": "x", "kind": "input", "width": 32, "params": {}}],
//!  "edges": [{"from": ["x", 0], "to": ["y", 0], "delay": 0}],
//!  "inputs": ["x"], "outputs": ["y"]}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{validate, DataflowGraph, GraphBuilder, Node, OpKind, Params, DEFAULT_WIDTH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub name: String,
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub kind: OpKind,
    #[serde(default = "default_width")]
    pub width: u32,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub latency: u32,
    #[serde(default)]
    pub params: Params,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub from: (String, usize),
    pub to: (String, usize),
    #[serde(default)]
    pub delay: u32,
}

fn default_width() -> u32 {
    DEFAULT_WIDTH
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

impl GraphDoc {
    pub fn from_graph(g: &DataflowGraph) -> Self {
        GraphDoc {
            name: g.name.clone(),
            nodes: g
                .nodes()
                .iter()
                .map(|n| NodeDoc {
                    id: n.id.clone(),
                    kind: n.kind,
                    width: n.width,
                    latency: n.latency,
                    params: n.params.clone(),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    from: (g.id(e.src.node).to_string(), e.src.port),
                    to: (g.id(e.dst.node).to_string(), e.dst.port),
                    delay: e.delay,
                })
                .collect(),
            inputs: g.inputs().iter().map(|&i| g.id(i).to_string()).collect(),
            outputs: g.outputs().iter().map(|&i| g.id(i).to_string()).collect(),
        }
    }

    /// Resolve references without checking semantic invariants.
    pub fn to_graph(&self) -> Result<DataflowGraph> {
        let mut b = GraphBuilder::new(self.name.clone());
        for n in &self.nodes {
            b.add_node(Node {
                id: n.id.clone(),
                kind: n.kind,
                latency: n.latency,
                width: n.width,
                params: n.params.clone(),
            });
        }
        for e in &self.edges {
            b.connect_delayed(&e.from.0, e.from.1, &e.to.0, e.to.1, e.delay);
        }
        b.inputs = self.inputs.clone();
        b.outputs = self.outputs.clone();
        b.build()
    }
}

/// Parse and validate a graph document.
pub fn parse_graph(text: &str) -> Result<DataflowGraph> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(Error::syntax)?;
    let graph = doc.to_graph()?;
    let violations = validate(&graph);
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(Error::InvalidGraph(violations))
    }
}

pub fn serialize_graph(graph: &DataflowGraph) -> String {
    serde_json::to_string_pretty(&GraphDoc::from_graph(graph)).expect("graph documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Violation;

    #[test]
    fn minimal_document() {
        let g = parse_graph(
            r#"{"name":"wire","nodes":[{"id":"i","kind":"input"},{"id":"o","kind":"output"}],
                "edges":[{"from":["i",0],"to":["o",0]}],"inputs":["i"],"outputs":["o"]}"#,
        )
        .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].delay, 0);
    }

    #[test]
    fn dangling_edge() {
        let err = parse_graph(
            r#"{"name":"x","nodes":[{"id":"i","kind":"input"}],
                "edges":[{"from":["i",0],"to":["ghost",0]}],"inputs":["i"]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DanglingReference(id) if id == "ghost"));
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_graph("{\n  \"name\": \"x\",\n  \"nodes\": [oops]\n}").unwrap_err();
        match err {
            Error::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn multiply_driven_is_rejected() {
        let err = parse_graph(
            r#"{"name":"x","nodes":[{"id":"i","kind":"input"},{"id":"o","kind":"output"}],
                "edges":[{"from":["i",0],"to":["o",0]},{"from":["i",0],"to":["o",0],"delay":1}],
                "inputs":["i"],"outputs":["o"]}"#,
        )
        .unwrap_err();
        match err {
            Error::InvalidGraph(v) => assert!(matches!(v[0], Violation::MultiplyDriven { .. })),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn zero_delay_cycle_is_rejected() {
        let err = parse_graph(
            r#"{"name":"x","nodes":[{"id":"a","kind":"negate"},{"id":"b","kind":"negate"}],
                "edges":[{"from":["a",0],"to":["b",0]},{"from":["b",0],"to":["a",0]}]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, Error::InvalidGraph(v) if matches!(v[0], Violation::ZeroDelayCycle { .. }))
        );
    }
}
