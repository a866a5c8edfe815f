//! Linear signal-flowgraph IR.
//!
//! A [`PlanGraph`] is a straight-line program over real values made of
//! inputs, two-operand signed additions, multiplications by constants and
//! outputs. Nodes are stored in topological order; node ids are positions
//! in that order.

mod constant;
mod fold;
pub mod io;
mod transpose;

use std::fmt;
use std::ops::{Add, AddAssign, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::DenseMatrix;

pub use constant::{ConstantClass, ExactConstant, UNIT_TOLERANCE};
pub use fold::{fold, fold_with_outputs, FoldOutcome};
pub use transpose::transpose;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(format!("sign must be 1 or -1, got {v}")),
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        match s {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Node {
    Input {
        index: usize,
    },
    /// `a + sign * b`
    Add {
        a: NodeId,
        b: NodeId,
        sign: Sign,
    },
    Scale {
        src: NodeId,
        constant: ExactConstant,
    },
    Output {
        index: usize,
        src: NodeId,
    },
}

impl Node {
    /// Nodes whose values this node reads, with the edge weight.
    fn operands(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Node::Input { .. } => (None, None),
            Node::Add { a, b, .. } => (Some(a), Some(b)),
            Node::Scale { src, .. } | Node::Output { src, .. } => (Some(src), None),
        };
        a.into_iter().chain(b)
    }
}

/// Operation counts: general multiplications, additions/subtractions and
/// shifts (multiplications by `±2^k`, `k != 0`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCount {
    pub mu: i64,
    pub alpha: i64,
    pub sigma: i64,
}

impl OpCount {
    pub const ZERO: OpCount = OpCount {
        mu: 0,
        alpha: 0,
        sigma: 0,
    };

    pub const fn new(mu: i64, alpha: i64, sigma: i64) -> Self {
        Self { mu, alpha, sigma }
    }

    /// Ordering used when comparing alternatives: multiplications first,
    /// then shifts, then additions.
    pub fn cost_key(&self) -> (i64, i64, i64) {
        (self.mu, self.sigma, self.alpha)
    }

    /// Componentwise `<=`.
    pub fn dominated_by(&self, other: &OpCount) -> bool {
        self.mu <= other.mu && self.alpha <= other.alpha && self.sigma <= other.sigma
    }
}

impl Add for OpCount {
    type Output = OpCount;

    fn add(self, rhs: OpCount) -> OpCount {
        OpCount::new(
            self.mu + rhs.mu,
            self.alpha + rhs.alpha,
            self.sigma + rhs.sigma,
        )
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, rhs: OpCount) {
        *self = *self + rhs;
    }
}

impl Sub for OpCount {
    type Output = OpCount;

    fn sub(self, rhs: OpCount) -> OpCount {
        OpCount::new(
            self.mu - rhs.mu,
            self.alpha - rhs.alpha,
            self.sigma - rhs.sigma,
        )
    }
}

impl fmt::Display for OpCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.mu, self.alpha, self.sigma)
    }
}

/// A validated linear flowgraph.
#[derive(Debug, Clone)]
pub struct PlanGraph {
    n_inputs: usize,
    n_outputs: usize,
    nodes: Vec<Node>,
}

impl PlanGraph {
    /// Validates and wraps a node list: every source precedes its reader,
    /// nothing reads an output node, and each input and output index
    /// appears exactly once.
    pub fn new(n_inputs: usize, n_outputs: usize, nodes: Vec<Node>) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 {
            return Err(Error::InvalidPlan("plan needs inputs and outputs".into()));
        }
        let mut seen_in = vec![false; n_inputs];
        let mut seen_out = vec![false; n_outputs];
        for (id, node) in nodes.iter().enumerate() {
            for src in node.operands() {
                if src >= id {
                    return Err(Error::InvalidPlan(format!(
                        "node {id} reads node {src} which does not precede it"
                    )));
                }
                if matches!(nodes[src], Node::Output { .. }) {
                    return Err(Error::InvalidPlan(format!(
                        "node {id} reads output node {src}"
                    )));
                }
            }
            match *node {
                Node::Input { index } => mark(&mut seen_in, index, "input")?,
                Node::Output { index, .. } => mark(&mut seen_out, index, "output")?,
                _ => {}
            }
        }
        if let Some(i) = seen_in.iter().position(|s| !s) {
            return Err(Error::InvalidPlan(format!("input {i} missing")));
        }
        if let Some(i) = seen_out.iter().position(|s| !s) {
            return Err(Error::InvalidPlan(format!("output {i} missing")));
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            nodes,
        })
    }

    /// Outputs wired straight to inputs.
    pub fn identity(n: usize) -> Result<Self> {
        let mut b = PlanBuilder::new(n, n);
        for i in 0..n {
            let x = b.input(i);
            b.output(i, x);
        }
        b.finish()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn is_square(&self) -> bool {
        self.n_inputs == self.n_outputs
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Applies the linear map in node order.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_inputs {
            return Err(Error::LengthMismatch {
                expected: self.n_inputs,
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        Ok(self.evaluate_unchecked(x))
    }

    fn evaluate_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut values = vec![0.0; self.nodes.len()];
        let mut out = vec![0.0; self.n_outputs];
        for (id, node) in self.nodes.iter().enumerate() {
            values[id] = match *node {
                Node::Input { index } => x[index],
                Node::Add { a, b, sign } => values[a] + sign.factor() * values[b],
                Node::Scale { src, constant } => constant.value() * values[src],
                Node::Output { index, src } => {
                    out[index] = values[src];
                    values[src]
                }
            };
        }
        out
    }

    /// The plan's matrix, one basis vector per column.
    pub fn to_matrix(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.n_outputs, self.n_inputs);
        let mut e = vec![0.0; self.n_inputs];
        for j in 0..self.n_inputs {
            e[j] = 1.0;
            for (i, v) in self.evaluate_unchecked(&e).into_iter().enumerate() {
                m.set(i, j, v);
            }
            e[j] = 0.0;
        }
        m
    }

    /// Counts live arithmetic. Multiplications by `±1` are free; `±2^k`
    /// counts as a shift; every add is one addition.
    pub fn count_ops(&self) -> OpCount {
        let live = self.live_nodes();
        let mut count = OpCount::ZERO;
        for (node, _) in self.nodes.iter().zip(&live).filter(|(_, l)| **l) {
            match node {
                Node::Add { .. } => count.alpha += 1,
                Node::Scale { constant, .. } => match constant.class() {
                    ConstantClass::Free => {}
                    ConstantClass::Shift => count.sigma += 1,
                    ConstantClass::Mult => count.mu += 1,
                },
                _ => {}
            }
        }
        count
    }

    /// Marks nodes that contribute to some output. Inputs are always live.
    pub(crate) fn live_nodes(&self) -> Vec<bool> {
        let mut live = vec![false; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            if matches!(node, Node::Output { .. } | Node::Input { .. }) {
                live[id] = true;
            }
            if live[id] {
                for src in node.operands() {
                    live[src] = true;
                }
            }
        }
        live
    }

    /// Drops nodes that no output depends on.
    pub fn prune(&self) -> PlanGraph {
        let live = self.live_nodes();
        if live.iter().all(|l| *l) {
            return self.clone();
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, node) in self.nodes.iter().enumerate() {
            if !live[id] {
                continue;
            }
            remap[id] = nodes.len();
            nodes.push(match *node {
                Node::Add { a, b, sign } => Node::Add {
                    a: remap[a],
                    b: remap[b],
                    sign,
                },
                Node::Scale { src, constant } => Node::Scale {
                    src: remap[src],
                    constant,
                },
                Node::Output { index, src } => Node::Output {
                    index,
                    src: remap[src],
                },
                input => input,
            });
        }
        PlanGraph {
            n_inputs: self.n_inputs,
            n_outputs: self.n_outputs,
            nodes,
        }
    }

    /// Node id feeding each output index.
    pub fn output_sources(&self) -> Vec<NodeId> {
        let mut srcs = vec![0; self.n_outputs];
        for node in &self.nodes {
            if let Node::Output { index, src } = *node {
                srcs[index] = src;
            }
        }
        srcs
    }
}

fn mark(seen: &mut [bool], index: usize, what: &str) -> Result<()> {
    match seen.get_mut(index) {
        None => Err(Error::InvalidPlan(format!(
            "{what} index {index} out of range"
        ))),
        Some(true) => Err(Error::InvalidPlan(format!("{what} index {index} repeated"))),
        Some(s) => {
            *s = true;
            Ok(())
        }
    }
}

/// Incremental plan construction. Input nodes are created up front.
#[derive(Debug)]
pub struct PlanBuilder {
    n_inputs: usize,
    n_outputs: usize,
    nodes: Vec<Node>,
}

impl PlanBuilder {
    pub fn new(n_inputs: usize, n_outputs: usize) -> Self {
        let nodes = (0..n_inputs).map(|index| Node::Input { index }).collect();
        Self {
            n_inputs,
            n_outputs,
            nodes,
        }
    }

    pub fn input(&self, index: usize) -> NodeId {
        assert!(index < self.n_inputs, "input {index} out of range");
        index
    }

    pub fn inputs(&self) -> Vec<NodeId> {
        (0..self.n_inputs).collect()
    }

    fn push(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn add_signed(&mut self, a: NodeId, b: NodeId, sign: Sign) -> NodeId {
        self.push(Node::Add { a, b, sign })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.add_signed(a, b, Sign::Plus)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.add_signed(a, b, Sign::Minus)
    }

    pub fn scale(&mut self, src: NodeId, constant: ExactConstant) -> NodeId {
        self.push(Node::Scale { src, constant })
    }

    /// Scale by a real value. Panics on zero or non-finite values, which
    /// never come out of the transform constants used here.
    pub fn scale_by(&mut self, src: NodeId, value: f64) -> NodeId {
        let c = ExactConstant::new(value).expect("scale constant must be finite and nonzero");
        self.scale(src, c)
    }

    pub fn output(&mut self, index: usize, src: NodeId) {
        self.push(Node::Output { index, src });
    }

    /// Inlines `plan` reading from `inputs`; returns the node carrying each
    /// of its outputs.
    pub fn embed(&mut self, plan: &PlanGraph, inputs: &[NodeId]) -> Vec<NodeId> {
        assert_eq!(inputs.len(), plan.n_inputs, "embed arity mismatch");
        let mut map = vec![usize::MAX; plan.nodes.len()];
        let mut outs = vec![usize::MAX; plan.n_outputs];
        for (id, node) in plan.nodes.iter().enumerate() {
            map[id] = match *node {
                Node::Input { index } => inputs[index],
                Node::Add { a, b, sign } => self.add_signed(map[a], map[b], sign),
                Node::Scale { src, constant } => self.scale(map[src], constant),
                Node::Output { index, src } => {
                    outs[index] = map[src];
                    continue;
                }
            };
        }
        outs
    }

    pub fn finish(self) -> Result<PlanGraph> {
        PlanGraph::new(self.n_inputs, self.n_outputs, self.nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn butterfly() -> PlanGraph {
        let mut b = PlanBuilder::new(2, 2);
        let s = b.add(0, 1);
        let d = b.sub(0, 1);
        b.output(0, s);
        b.output(1, d);
        b.finish().unwrap()
    }

    #[test]
    fn identity_plan() {
        let p = PlanGraph::identity(2).unwrap();
        assert_eq!(p.evaluate(&[3.0, 5.0]).unwrap(), vec![3.0, 5.0]);
        assert_eq!(p.to_matrix(), DenseMatrix::identity(2));
        assert_eq!(p.count_ops(), OpCount::ZERO);
    }

    #[test]
    fn butterfly_plan() {
        let p = butterfly();
        assert_eq!(p.evaluate(&[1.0, 2.0]).unwrap(), vec![3.0, -1.0]);
        assert_eq!(p.to_matrix(), oracle::b_matrix(2).unwrap());
        assert_eq!(p.count_ops(), OpCount::new(0, 2, 0));
    }

    #[test]
    fn evaluate_errors() {
        let p = butterfly();
        assert!(matches!(
            p.evaluate(&[1.0]),
            Err(Error::LengthMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            p.evaluate(&[1.0, f64::NAN]),
            Err(Error::NonFiniteInput(1))
        ));
    }

    #[test]
    fn counting_classes() {
        let mut b = PlanBuilder::new(1, 4);
        let x = b.input(0);
        let neg = b.scale(x, ExactConstant::MINUS_ONE);
        let half = b.scale(x, ExactConstant::HALF);
        let m = b.scale_by(x, 0.3);
        let s = b.add(neg, half);
        b.output(0, neg);
        b.output(1, half);
        b.output(2, m);
        b.output(3, s);
        assert_eq!(b.finish().unwrap().count_ops(), OpCount::new(1, 1, 1));
    }

    #[test]
    fn dead_nodes_are_not_counted() {
        let mut b = PlanBuilder::new(1, 1);
        let x = b.input(0);
        let _dead = b.scale_by(x, 0.3);
        b.output(0, x);
        let p = b.finish().unwrap();
        assert_eq!(p.count_ops(), OpCount::ZERO);
        assert_eq!(p.prune().nodes().len(), 2);
    }

    #[test]
    fn validation() {
        let forward = vec![
            Node::Input { index: 0 },
            Node::Output { index: 0, src: 2 },
            Node::Scale {
                src: 0,
                constant: ExactConstant::TWO,
            },
        ];
        assert!(PlanGraph::new(1, 1, forward).is_err());
        let missing = vec![Node::Input { index: 0 }];
        assert!(PlanGraph::new(1, 1, missing).is_err());
        let repeated = vec![
            Node::Input { index: 0 },
            Node::Output { index: 0, src: 0 },
            Node::Output { index: 0, src: 0 },
        ];
        assert!(PlanGraph::new(1, 1, repeated).is_err());
        let reads_output = vec![
            Node::Input { index: 0 },
            Node::Output { index: 0, src: 0 },
            Node::Add {
                a: 0,
                b: 1,
                sign: Sign::Plus,
            },
        ];
        assert!(PlanGraph::new(1, 1, reads_output).is_err());
    }

    #[test]
    fn embedding_composes() {
        let bf = butterfly();
        let mut b = PlanBuilder::new(2, 2);
        let first = b.embed(&bf, &[0, 1]);
        let second = b.embed(&bf, &first);
        b.output(0, second[0]);
        b.output(1, second[1]);
        let p = b.finish().unwrap();
        assert_eq!(p.evaluate(&[1.0, 2.0]).unwrap(), vec![2.0, 4.0]);
    }
}
