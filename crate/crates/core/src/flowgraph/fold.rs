//! Constant folding over flowgraphs.
//!
//! The pass walks the graph once in topological order and represents every
//! value as `factor * core`, where `core` is a node of the rewritten graph
//! and `factor` a pending [`ExactConstant`]. Scales only update the pending
//! factor, so chains of constants merge and `2 * 1/2` cancels exactly. At an
//! addition one operand's factor is pulled out of the sum (distributivity)
//! and only the ratio between the two factors is materialized; a ratio of
//! `±1` costs nothing. Pending factors reaching an output are either
//! materialized there or, for scaled factorizations, handed back to the
//! caller to be absorbed into the output scale factors.
//!
//! Which operand's factor travels on is decided by a carry policy. The pass
//! runs under every policy and keeps the cheapest result in `(mu, sigma,
//! alpha)` order among those that do not increase any count.

use std::collections::HashMap;

use super::{ConstantClass, ExactConstant, Node, NodeId, PlanBuilder, PlanGraph, Sign};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CarryPolicy {
    /// Materialize factors at every addition; only merges scale chains.
    Eager,
    /// Carry the factor whose class ranks highest in the given order.
    Prefer([ConstantClass; 3]),
}

const POLICIES: [CarryPolicy; 4] = [
    CarryPolicy::Eager,
    CarryPolicy::Prefer([
        ConstantClass::Shift,
        ConstantClass::Mult,
        ConstantClass::Free,
    ]),
    CarryPolicy::Prefer([
        ConstantClass::Mult,
        ConstantClass::Shift,
        ConstantClass::Free,
    ]),
    CarryPolicy::Prefer([
        ConstantClass::Free,
        ConstantClass::Shift,
        ConstantClass::Mult,
    ]),
];

impl CarryPolicy {
    fn rank(&self, c: &ExactConstant) -> usize {
        match self {
            CarryPolicy::Eager => 0,
            CarryPolicy::Prefer(order) => {
                let pos = order.iter().position(|k| *k == c.class()).unwrap_or(3);
                3 - pos
            }
        }
    }
}

/// Result of folding when output factors may be left pending.
#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub plan: PlanGraph,
    /// Positive factor per output: original output `i` equals
    /// `output_factors[i]` times output `i` of `plan`.
    pub output_factors: Vec<ExactConstant>,
}

/// Folds constants while preserving the plan's matrix.
pub fn fold(plan: &PlanGraph) -> PlanGraph {
    let original = plan.prune();
    let budget = original.count_ops();
    POLICIES
        .iter()
        .map(|&policy| propagate(&original, policy, false).plan)
        .filter(|p| p.count_ops().dominated_by(&budget))
        .min_by_key(|p| p.count_ops().cost_key())
        .unwrap_or(original)
}

/// Folds constants, leaving positive per-output factors pending instead of
/// materializing them. Used for scaled factorizations, where output factors
/// join the diagonal scale matrix.
pub fn fold_with_outputs(plan: &PlanGraph) -> FoldOutcome {
    let original = plan.prune();
    let budget = original.count_ops();
    POLICIES
        .iter()
        .map(|&policy| propagate(&original, policy, true))
        .filter(|o| o.plan.count_ops().dominated_by(&budget))
        .min_by_key(|o| o.plan.count_ops().cost_key())
        .unwrap_or_else(|| FoldOutcome {
            output_factors: vec![ExactConstant::ONE; original.n_outputs()],
            plan: original,
        })
}

struct Rewriter {
    builder: PlanBuilder,
    scaled: HashMap<NodeId, Vec<(ExactConstant, NodeId)>>,
}

impl Rewriter {
    /// `core * factor`, sharing identical scales of the same core.
    fn materialize(&mut self, core: NodeId, factor: ExactConstant) -> NodeId {
        if factor.is_one() {
            return core;
        }
        let known = self.scaled.entry(core).or_default();
        if let Some(&(_, id)) = known.iter().find(|(k, _)| k.approx_eq(&factor)) {
            return id;
        }
        let id = self.builder.scale(core, factor);
        self.scaled.entry(core).or_default().push((factor, id));
        id
    }
}

fn propagate(plan: &PlanGraph, policy: CarryPolicy, absorb_outputs: bool) -> FoldOutcome {
    let nodes = plan.nodes();
    let mut rw = Rewriter {
        builder: PlanBuilder::new(plan.n_inputs(), plan.n_outputs()),
        scaled: HashMap::new(),
    };
    let mut state: Vec<(NodeId, ExactConstant)> =
        vec![(usize::MAX, ExactConstant::ONE); nodes.len()];
    let mut output_factors = vec![ExactConstant::ONE; plan.n_outputs()];

    for (id, node) in nodes.iter().enumerate() {
        state[id] = match *node {
            Node::Input { index } => (rw.builder.input(index), ExactConstant::ONE),
            Node::Scale { src, constant } => {
                let (core, f) = state[src];
                (core, f * constant)
            }
            Node::Add { a, b, sign } => {
                let (ca, fa) = state[a];
                let (cb, fb) = state[b];
                let fb = if sign.is_minus() { -fb } else { fb };
                let mut carried = choose_carried(policy, (ca, fa), (cb, fb));
                let mut ra = fa / carried;
                let mut rb = fb / carried;
                if ra.is_negative() && rb.is_negative() {
                    carried = -carried;
                    ra = -ra;
                    rb = -rb;
                }
                let sum = if ra.is_negative() {
                    let lhs = rw.materialize(cb, rb);
                    let rhs = rw.materialize(ca, -ra);
                    rw.builder.add_signed(lhs, rhs, Sign::Minus)
                } else {
                    let lhs = rw.materialize(ca, ra);
                    let rhs = rw.materialize(cb, rb.abs());
                    let s = if rb.is_negative() {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    };
                    rw.builder.add_signed(lhs, rhs, s)
                };
                (sum, carried)
            }
            Node::Output { index, src } => {
                let (core, f) = state[src];
                let out = if absorb_outputs {
                    output_factors[index] = f.abs();
                    if f.is_negative() {
                        rw.materialize(core, ExactConstant::MINUS_ONE)
                    } else {
                        core
                    }
                } else {
                    rw.materialize(core, f)
                };
                rw.builder.output(index, out);
                (usize::MAX, ExactConstant::ONE)
            }
        };
    }

    let plan = rw
        .builder
        .finish()
        .expect("folding preserves plan validity")
        .prune();
    FoldOutcome {
        plan,
        output_factors,
    }
}

fn choose_carried(
    policy: CarryPolicy,
    (ca, fa): (NodeId, ExactConstant),
    (cb, fb): (NodeId, ExactConstant),
) -> ExactConstant {
    if (fa / fb).class() == ConstantClass::Free {
        return fa.abs();
    }
    if policy == CarryPolicy::Eager {
        return ExactConstant::ONE;
    }
    let (rank_a, rank_b) = (policy.rank(&fa), policy.rank(&fb));
    let pick_a = rank_a > rank_b || (rank_a == rank_b && ca <= cb);
    if pick_a {
        fa.abs()
    } else {
        fb.abs()
    }
}
