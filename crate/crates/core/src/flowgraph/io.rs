//! Plan files and DOT export.
//!
//! A plan file is a JSON object:
//!
//! ```json
//! {
//!   "format": "dct-flowgraph",
//!   "version": 1,
//!   "transform": "dct2",
//!   "n_inputs": 2,
//!   "n_outputs": 2,
//!   "nodes": [
//!     {"id": 0, "op": "input", "index": 0},
//!     {"id": 1, "op": "input", "index": 1},
//!     {"id": 2, "op": "add", "a": 0, "b": 1, "sign": 1},
//!     {"id": 3, "op": "add", "a": 0, "b": 1, "sign": -1},
//!     {"id": 4, "op": "scale", "src": 3,
//!      "constant": {"sign": 1, "k": -1, "mantissa": 1.4142135623730951}},
//!     {"id": 5, "op": "output", "index": 0, "src": 2},
//!     {"id": 6, "op": "output", "index": 1, "src": 4}
//!   ],
//!   "counts": {"mu": 1, "alpha": 2, "sigma": 0}
//! }
//! ```
//!
//! `id` must equal the node's position. `transform` is one of `dct2`,
//! `dct3`, `dct4` or `scaled-dct2`, or absent for an unlabelled plan; scaled
//! plans also carry `pi` and `delta`. `counts` is informational and
//! recomputed on load.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Node, OpCount, PlanGraph, Sign};
use crate::error::{Error, Result};

pub const FORMAT_TAG: &str = "dct-flowgraph";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransformKind {
    #[serde(rename = "dct2")]
    Dct2,
    #[serde(rename = "dct3")]
    Dct3,
    #[serde(rename = "dct4")]
    Dct4,
    #[serde(rename = "scaled-dct2")]
    ScaledDct2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    #[serde(flatten)]
    node: Node,
}

/// On-disk representation of a plan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub format: String,
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformKind>,
    pub n_inputs: usize,
    pub n_outputs: usize,
    nodes: Vec<NodeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<OpCount>,
}

impl PlanFile {
    pub fn new(plan: &PlanGraph, transform: Option<TransformKind>) -> Self {
        Self {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            transform,
            n_inputs: plan.n_inputs(),
            n_outputs: plan.n_outputs(),
            nodes: plan
                .nodes()
                .iter()
                .enumerate()
                .map(|(id, &node)| NodeRecord { id, node })
                .collect(),
            pi: None,
            delta: None,
            counts: Some(plan.count_ops()),
        }
    }

    /// Validates the header and node ids and builds the graph.
    pub fn to_plan(&self) -> Result<PlanGraph> {
        if self.format != FORMAT_TAG {
            return Err(Error::InvalidPlan(format!(
                "unknown format {:?}",
                self.format
            )));
        }
        if self.version != FORMAT_VERSION {
            return Err(Error::InvalidPlan(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if let Some(r) = self.nodes.iter().enumerate().find(|(i, r)| r.id != *i) {
            return Err(Error::InvalidPlan(format!(
                "node at position {} has id {}",
                r.0, r.1.id
            )));
        }
        PlanGraph::new(
            self.n_inputs,
            self.n_outputs,
            self.nodes.iter().map(|r| r.node).collect(),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan files always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Graphviz rendering. Inputs are `in<i>`, outputs `out<i>`, adds are
/// circles, subtracted edges are dashed and constants label their edge.
pub fn to_dot(plan: &PlanGraph, name: &str) -> String {
    let nodes = plan.nodes();
    let label = |id: usize| -> String {
        match nodes[id] {
            Node::Input { index } => format!("in{index}"),
            _ => format!("n{id}"),
        }
    };
    let mut out = String::new();
    let _ = writeln!(out, "digraph \"{name}\" {{");
    let _ = writeln!(out, "  rankdir=LR;");
    for (id, node) in nodes.iter().enumerate() {
        match *node {
            Node::Input { index } => {
                let _ = writeln!(out, "  in{index} [shape=box, label=\"x{index}\"];");
            }
            Node::Add { a, b, sign } => {
                let _ = writeln!(out, "  n{id} [shape=circle, label=\"+\"];");
                let _ = writeln!(out, "  {} -> n{id};", label(a));
                let style = if sign == Sign::Minus {
                    " [style=dashed]"
                } else {
                    ""
                };
                let _ = writeln!(out, "  {} -> n{id}{style};", label(b));
            }
            Node::Scale { src, constant } => {
                let _ = writeln!(out, "  n{id} [shape=point];");
                let _ = writeln!(out, "  {} -> n{id} [label=\"{constant}\"];", label(src));
            }
            Node::Output { index, src } => {
                let _ = writeln!(out, "  out{index} [shape=box, label=\"y{index}\"];");
                let _ = writeln!(out, "  {} -> out{index};", label(src));
            }
        }
    }
    out.push_str("}\n");
    out
}
