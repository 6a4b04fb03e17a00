use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{validate, Diagram, DiagramClass, Label, Node};
use crate::error::{Error, Result};
use crate::formula::{Assignment, VarId, WeightMap};

/// The label reached under a total assignment.
pub fn evaluate(d: &Diagram, theta: &Assignment) -> Result<Label> {
    evaluate_with(d, |v| theta.get(v))
}

/// Evaluation against any variable lookup. Pure decision diagrams are walked
/// along the single selected path; diagrams with combinator nodes are
/// evaluated bottom-up over the nodes the root can reach.
pub fn evaluate_with(d: &Diagram, lookup: impl Fn(&VarId) -> Option<bool>) -> Result<Label> {
    let decision_only = d
        .nodes()
        .iter()
        .all(|n| matches!(n, Node::Sink(_) | Node::Decision { .. } | Node::NoOp(_)));
    if decision_only {
        let mut cur = d.root();
        loop {
            match d.node(cur) {
                Node::Sink(l) => return Ok(*l),
                Node::NoOp(c) => cur = *c,
                Node::Decision { var, lo, hi } => {
                    let b = lookup(var).ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
                    cur = if b { *hi } else { *lo };
                }
                _ => unreachable!(),
            }
        }
    }
    let full = super::mask(d.outputs());
    let mut memo: Vec<Option<u64>> = vec![None; d.size()];
    // Explicit stack: compile traces can be deep.
    let mut stack = vec![d.root()];
    while let Some(&id) = stack.last() {
        if memo[id].is_some() {
            stack.pop();
            continue;
        }
        let node = d.node(id);
        let pending: Vec<usize> = match node {
            Node::Decision { var, lo, hi } => {
                let b = lookup(var).ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
                vec![if b { *hi } else { *lo }]
            }
            other => other.children().collect(),
        }
        .into_iter()
        .filter(|&c| memo[c].is_none())
        .collect();
        if !pending.is_empty() {
            stack.extend(pending);
            continue;
        }
        let get = |c: usize| memo[c].unwrap();
        let value = match node {
            Node::Sink(l) => l.0,
            Node::Decision { var, lo, hi } => {
                if lookup(var).unwrap() {
                    get(*hi)
                } else {
                    get(*lo)
                }
            }
            Node::And(l, r) => get(*l) & get(*r),
            Node::Or(l, r) => get(*l) | get(*r),
            Node::Xor(l, r) => get(*l) ^ get(*r),
            Node::Equiv(l, r) => !(get(*l) ^ get(*r)) & full,
            Node::Not(c) => !get(*c) & full,
            Node::NoOp(c) => get(*c),
        };
        memo[id] = Some(value);
        stack.pop();
    }
    Ok(Label(memo[d.root()].unwrap()))
}

/// Per-output probabilities by one bottom-up pass. The diagram must be
/// read-once and decomposable, otherwise the recurrences are unsound.
pub fn wmc(d: &Diagram, w: &WeightMap) -> Result<Vec<BigRational>> {
    let report = validate(d);
    if report.class == DiagramClass::Invalid {
        return Err(Error::InvalidDiagram(report.describe()));
    }
    Ok(wmc_unchecked(d, w))
}

/// [`wmc`] without the validation pass, for diagrams valid by construction.
pub fn wmc_unchecked(d: &Diagram, w: &WeightMap) -> Vec<BigRational> {
    let m = d.outputs();
    let one = BigRational::one();
    let mut values: Vec<Vec<BigRational>> = Vec::with_capacity(d.size());
    for node in d.nodes() {
        let v: Vec<BigRational> = match node {
            Node::Sink(l) => (0..m)
                .map(|i| if l.bit(i) { one.clone() } else { BigRational::zero() })
                .collect(),
            Node::Decision { var, lo, hi } => {
                let p = w.get(var);
                let q = &one - p;
                values[*lo]
                    .iter()
                    .zip(&values[*hi])
                    .map(|(a, b)| &q * a + p * b)
                    .collect()
            }
            Node::And(l, r) => values[*l].iter().zip(&values[*r]).map(|(a, b)| a * b).collect(),
            Node::Or(l, r) => values[*l]
                .iter()
                .zip(&values[*r])
                .map(|(a, b)| &one - (&one - a) * (&one - b))
                .collect(),
            Node::Xor(l, r) => values[*l]
                .iter()
                .zip(&values[*r])
                .map(|(a, b)| a * (&one - b) + (&one - a) * b)
                .collect(),
            Node::Equiv(l, r) => values[*l]
                .iter()
                .zip(&values[*r])
                .map(|(a, b)| a * b + (&one - a) * (&one - b))
                .collect(),
            Node::Not(c) => values[*c].iter().map(|a| &one - a).collect(),
            Node::NoOp(c) => values[*c].clone(),
        };
        values.push(v);
    }
    values.swap_remove(d.root())
}
