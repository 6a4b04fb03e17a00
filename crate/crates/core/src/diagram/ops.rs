use super::{Diagram, DiagramBuilder, Label, Node, NodeId};
use crate::error::{Error, Result};
use crate::formula::Assignment;

/// The dual diagram: same shape, complemented sinks, `And`/`Or` and
/// `Xor`/`Equiv` swapped. It computes the negation of the input.
pub fn dualize(d: &Diagram) -> Result<Diagram> {
    if d.outputs() != 1 {
        return Err(Error::Unsupported(format!(
            "dualize needs a single-output diagram, got {} outputs",
            d.outputs()
        )));
    }
    let nodes = d
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Sink(l) => Node::Sink(l.complement(1)),
            Node::And(l, r) => Node::Or(*l, *r),
            Node::Or(l, r) => Node::And(*l, *r),
            Node::Xor(l, r) => Node::Equiv(*l, *r),
            Node::Equiv(l, r) => Node::Xor(*l, *r),
            other => other.clone(),
        })
        .collect();
    Ok(Diagram {
        nodes,
        root: d.root(),
        outputs: 1,
        universe: d.universe().to_vec(),
    })
}

/// Redirects every edge into a no-op node to that node's eventual target.
pub fn remove_noops(d: &Diagram) -> Diagram {
    let mut b = DiagramBuilder::new(d.outputs());
    b.declare(d.universe().iter().cloned());
    let mut target: Vec<NodeId> = Vec::with_capacity(d.size());
    for node in d.nodes() {
        let id = match node {
            Node::NoOp(c) => target[*c],
            other => b.push(other.remap(|c| target[c])),
        };
        target.push(id);
    }
    b.finish(target[d.root()])
}

/// Replaces each test of a variable bound by `theta` with a no-op to the
/// selected child.
pub fn restrict_diagram(d: &Diagram, theta: &Assignment) -> Diagram {
    let nodes = d
        .nodes()
        .iter()
        .map(|n| match n {
            Node::Decision { var, lo, hi } => match theta.get(var) {
                Some(true) => Node::NoOp(*hi),
                Some(false) => Node::NoOp(*lo),
                None => n.clone(),
            },
            other => other.clone(),
        })
        .collect();
    Diagram {
        nodes,
        root: d.root(),
        outputs: d.outputs(),
        universe: d.universe().to_vec(),
    }
}

/// Rewrites every sink label; the result has `outputs` outputs.
pub fn map_labels(d: &Diagram, outputs: usize, f: impl Fn(Label) -> Label) -> Diagram {
    let mut b = DiagramBuilder::new(outputs);
    b.declare(d.universe().iter().cloned());
    let mut target: Vec<NodeId> = Vec::with_capacity(d.size());
    for node in d.nodes() {
        let id = match node {
            Node::Sink(l) => b.sink(f(*l)),
            other => b.push(other.remap(|c| target[c])),
        };
        target.push(id);
    }
    b.finish(target[d.root()])
}

/// Single-output view of output `i`.
pub fn project_output(d: &Diagram, i: usize) -> Diagram {
    map_labels(d, 1, |l| Label(u64::from(l.bit(i))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{evaluate, validate, DiagramClass};
    use crate::formula::VarId;

    #[test]
    fn dual_of_one_sink() {
        let mut b = DiagramBuilder::new(1);
        let one = b.constant(true);
        let d = b.finish(one);
        let o = dualize(&d).unwrap();
        assert_eq!(o.node(o.root()), &Node::Sink(Label(0)));
        assert_eq!(dualize(&o).unwrap(), d);
    }

    #[test]
    fn dualize_rejects_multi_output() {
        let mut b = DiagramBuilder::new(2);
        let s = b.sink(Label(1));
        assert!(matches!(dualize(&b.finish(s)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn noop_chain_collapses() {
        let mut b = DiagramBuilder::new(1);
        let one = b.constant(true);
        let p1 = b.push(Node::NoOp(one));
        let p2 = b.push(Node::NoOp(p1));
        let d = b.finish(p2);
        let r = remove_noops(&d);
        assert_eq!(r.size(), 1);
        assert_eq!(r.node(r.root()), &Node::Sink(Label(1)));
    }

    #[test]
    fn noop_free_diagram_unchanged() {
        let mut b = DiagramBuilder::new(1);
        let zero = b.constant(false);
        let one = b.constant(true);
        let x = b.decision(VarId::sym("X"), zero, one);
        let d = b.finish(x);
        assert_eq!(remove_noops(&d), d);
    }

    #[test]
    fn restriction_becomes_noop() {
        let x = VarId::sym("X");
        let mut b = DiagramBuilder::new(1);
        let zero = b.constant(false);
        let one = b.constant(true);
        let root = b.decision(x.clone(), zero, one);
        let d = b.finish(root);
        let theta = Assignment::from_pairs([(x, true)]).unwrap();
        let r = restrict_diagram(&d, &theta);
        assert_eq!(r.node(r.root()), &Node::NoOp(one));
        assert_eq!(evaluate(&r, &Assignment::new()).unwrap(), Label(1));
        assert_eq!(restrict_diagram(&d, &Assignment::new()), d);
        assert_eq!(validate(&r).class, DiagramClass::Fbdd);
    }
}
