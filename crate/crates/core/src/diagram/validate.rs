use std::collections::{HashMap, VecDeque};
use std::fmt;

use fixedbitset::FixedBitSet;

use super::{Diagram, Node, NodeId};
use crate::formula::VarId;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramClass {
    Fbdd,
    DecDnnf,
    Dldd,
    Invalid,
}

impl fmt::Display for DiagramClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagramClass::Fbdd => "FBDD",
            DiagramClass::DecDnnf => "dec-DNNF",
            DiagramClass::Dldd => "DLDD",
            DiagramClass::Invalid => "invalid",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadOnceViolation {
    pub var: VarId,
    /// Root to the first test of `var`, then on to the repeated test.
    pub path: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposabilityViolation {
    pub node: NodeId,
    pub shared: VarId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub is_read_once: bool,
    pub read_once_violation: Option<ReadOnceViolation>,
    pub decomposable: bool,
    pub decomposability_violation: Option<DecomposabilityViolation>,
    pub class: DiagramClass,
}

impl ValidationReport {
    pub fn describe(&self) -> String {
        let mut parts = vec![format!("class {}", self.class)];
        if let Some(v) = &self.read_once_violation {
            parts.push(format!("{} tested twice along path {:?}", v.var, v.path));
        }
        if let Some(v) = &self.decomposability_violation {
            parts.push(format!("node {} shares {} between its children", v.node, v.shared));
        }
        parts.join("; ")
    }
}

/// Read-once and decomposability checks over per-node `VarsBelow` sets.
pub fn validate(d: &Diagram) -> ValidationReport {
    let index: HashMap<&VarId, usize> = d
        .universe()
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let nv = d.universe().len();
    let mut below: Vec<FixedBitSet> = Vec::with_capacity(d.size());
    let mut read_once_bad: Option<(NodeId, usize)> = None;
    let mut decomp_bad: Option<(NodeId, usize)> = None;
    for (id, node) in d.nodes().iter().enumerate() {
        let mut set = FixedBitSet::with_capacity(nv);
        match node {
            Node::Sink(_) => {}
            Node::Decision { var, lo, hi } => {
                let x = index[var];
                if read_once_bad.is_none() && (below[*lo].contains(x) || below[*hi].contains(x)) {
                    read_once_bad = Some((id, x));
                }
                set.union_with(&below[*lo]);
                set.union_with(&below[*hi]);
                set.insert(x);
            }
            Node::And(l, r) | Node::Or(l, r) | Node::Xor(l, r) | Node::Equiv(l, r) => {
                if decomp_bad.is_none() {
                    if let Some(x) = below[*l].intersection(&below[*r]).next() {
                        decomp_bad = Some((id, x));
                    }
                }
                set.union_with(&below[*l]);
                set.union_with(&below[*r]);
            }
            Node::Not(c) | Node::NoOp(c) => set.union_with(&below[*c]),
        }
        below.push(set);
    }

    let reach = reachable(d);
    // Only violations the root can reach matter; recheck on the reachable
    // part when the first hit was in dead code.
    if let Some((id, _)) = read_once_bad {
        if !reach[id] {
            read_once_bad = d.nodes().iter().enumerate().find_map(|(id, n)| match n {
                Node::Decision { var, lo, hi } if reach[id] => {
                    let x = index[var];
                    (below[*lo].contains(x) || below[*hi].contains(x)).then_some((id, x))
                }
                _ => None,
            });
        }
    }
    if let Some((id, _)) = decomp_bad {
        if !reach[id] {
            decomp_bad = d.nodes().iter().enumerate().find_map(|(id, n)| match n {
                Node::And(l, r) | Node::Or(l, r) | Node::Xor(l, r) | Node::Equiv(l, r)
                    if reach[id] =>
                {
                    below[*l].intersection(&below[*r]).next().map(|x| (id, x))
                }
                _ => None,
            });
        }
    }

    let read_once_violation = read_once_bad.map(|(id, x)| ReadOnceViolation {
        var: d.universe()[x].clone(),
        path: witness_path(d, &below, id, x),
    });
    let decomposability_violation = decomp_bad.map(|(id, x)| DecomposabilityViolation {
        node: id,
        shared: d.universe()[x].clone(),
    });

    let kinds = d
        .nodes()
        .iter()
        .enumerate()
        .filter(|(id, _)| reach[*id])
        .map(|(_, n)| n);
    let (mut has_and, mut has_other) = (false, false);
    for n in kinds {
        match n {
            Node::And(..) => has_and = true,
            Node::Or(..) | Node::Xor(..) | Node::Equiv(..) | Node::Not(_) => has_other = true,
            _ => {}
        }
    }
    let is_read_once = read_once_violation.is_none();
    let decomposable = decomposability_violation.is_none();
    let class = if !is_read_once || !decomposable {
        DiagramClass::Invalid
    } else if has_other {
        DiagramClass::Dldd
    } else if has_and {
        DiagramClass::DecDnnf
    } else {
        DiagramClass::Fbdd
    };
    ValidationReport {
        is_read_once,
        read_once_violation,
        decomposable,
        decomposability_violation,
        class,
    }
}

fn reachable(d: &Diagram) -> Vec<bool> {
    let mut reach = vec![false; d.size()];
    reach[d.root()] = true;
    for id in (0..d.size()).rev() {
        if reach[id] {
            for c in d.node(id).children() {
                reach[c] = true;
            }
        }
    }
    reach
}

fn witness_path(d: &Diagram, below: &[FixedBitSet], at: NodeId, x: usize) -> Vec<NodeId> {
    // Root to `at` by BFS over child edges.
    let mut prev: Vec<Option<NodeId>> = vec![None; d.size()];
    let mut seen = vec![false; d.size()];
    let mut queue = VecDeque::from([d.root()]);
    seen[d.root()] = true;
    while let Some(u) = queue.pop_front() {
        if u == at {
            break;
        }
        for c in d.node(u).children() {
            if !seen[c] {
                seen[c] = true;
                prev[c] = Some(u);
                queue.push_back(c);
            }
        }
    }
    let mut path = vec![at];
    let mut cur = at;
    while let Some(p) = prev[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    // Then down to the repeated test of the same variable.
    let mut cur = d
        .node(at)
        .children()
        .find(|&c| below[c].contains(x))
        .expect("violation implies a child mentions the variable");
    loop {
        path.push(cur);
        match d.node(cur) {
            Node::Decision { var, .. } if d.universe()[x] == *var => break,
            n => {
                cur = n
                    .children()
                    .find(|&c| below[c].contains(x))
                    .expect("variable is below this node");
            }
        }
    }
    path
}
