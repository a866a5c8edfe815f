use super::{ExactConstant, Node, NodeId, PlanBuilder, PlanGraph, Sign};

#[derive(Clone, Copy)]
enum Edge {
    Signed(Sign),
    Scaled(ExactConstant),
}

/// Transposes a plan by reversing its edges.
///
/// Every node becomes the sum of its consumers' adjoints, so fan-out points
/// turn into additions and additions turn into fan-out points. Scales keep
/// their constant. For a square plan without dead code the operation counts
/// are unchanged: the transposed plan has `adds + outputs - inputs`
/// additions.
pub fn transpose(plan: &PlanGraph) -> PlanGraph {
    let plan = plan.prune();
    let nodes = plan.nodes();
    let mut consumers: Vec<Vec<(NodeId, Edge)>> = vec![Vec::new(); nodes.len()];
    for (id, node) in nodes.iter().enumerate() {
        match *node {
            Node::Input { .. } => {}
            Node::Add { a, b, sign } => {
                consumers[a].push((id, Edge::Signed(Sign::Plus)));
                consumers[b].push((id, Edge::Signed(sign)));
            }
            Node::Scale { src, constant } => consumers[src].push((id, Edge::Scaled(constant))),
            Node::Output { src, .. } => consumers[src].push((id, Edge::Signed(Sign::Plus))),
        }
    }

    let mut b = PlanBuilder::new(plan.n_outputs(), plan.n_inputs());
    let mut adjoint = vec![usize::MAX; nodes.len()];
    for id in (0..nodes.len()).rev() {
        if let Node::Output { index, .. } = nodes[id] {
            adjoint[id] = b.input(index);
            continue;
        }
        let terms: Vec<(NodeId, Sign)> = consumers[id]
            .iter()
            .map(|&(c, edge)| match edge {
                Edge::Signed(s) => (adjoint[c], s),
                Edge::Scaled(k) => (b.scale(adjoint[c], k), Sign::Plus),
            })
            .collect();
        adjoint[id] = signed_sum(&mut b, &terms);
        if let Node::Input { index } = nodes[id] {
            b.output(index, adjoint[id]);
        }
    }
    b.finish().expect("transposition preserves plan validity")
}

fn signed_sum(b: &mut PlanBuilder, terms: &[(NodeId, Sign)]) -> NodeId {
    let Some(&(first, first_sign)) = terms.first() else {
        // an input nothing reads: its column is zero
        let x = b.input(0);
        return b.sub(x, x);
    };
    match terms.iter().position(|(_, s)| *s == Sign::Plus) {
        Some(lead) => {
            let mut acc = terms[lead].0;
            for (i, &(t, s)) in terms.iter().enumerate() {
                if i != lead {
                    acc = b.add_signed(acc, t, s);
                }
            }
            acc
        }
        None => {
            debug_assert_eq!(first_sign, Sign::Minus);
            let mut acc = first;
            for &(t, _) in &terms[1..] {
                acc = b.add(acc, t);
            }
            b.scale(acc, ExactConstant::MINUS_ONE)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowgraph::OpCount;
    use crate::oracle::DenseMatrix;

    #[test]
    fn identity_transposes_to_identity() {
        let p = PlanGraph::identity(3).unwrap();
        let t = transpose(&p);
        assert_eq!(t.to_matrix(), DenseMatrix::identity(3));
        assert_eq!(t.count_ops(), OpCount::ZERO);
    }

    #[test]
    fn rectangular_plan() {
        // y0 = x0 + 2 x1 - x2, y1 = 0.3 x2
        let mut b = PlanBuilder::new(3, 2);
        let two = b.scale(1, ExactConstant::TWO);
        let s = b.add(0, two);
        let y0 = b.sub(s, 2);
        let y1 = b.scale_by(2, 0.3);
        b.output(0, y0);
        b.output(1, y1);
        let p = b.finish().unwrap();
        let t = transpose(&p);
        assert!(t.to_matrix().max_abs_diff(&p.to_matrix().transpose()) < 1e-15);
        assert_eq!(t.n_inputs(), 2);
        assert_eq!(t.n_outputs(), 3);
    }

    #[test]
    fn all_negative_fanout_and_unused_input() {
        // y0 = -x0 - x0 (via two subtractions), x1 unused
        let mut b = PlanBuilder::new(2, 2);
        let z = b.sub(1, 1);
        let n1 = b.sub(z, 0);
        let n2 = b.sub(n1, 0);
        b.output(0, n2);
        b.output(1, z);
        let p = b.finish().unwrap();
        let t = transpose(&p);
        assert!(t.to_matrix().max_abs_diff(&p.to_matrix().transpose()) < 1e-15);
    }
}
