//! Decision diagrams with logical combinator nodes.
//!
//! One DAG type houses FBDDs, dec-DNNFs, DLDDs and multi-output FBDDs.
//! Nodes are stored children-first, so every index refers only to smaller
//! indices and the root is the last node of a finished diagram.

mod eval;
mod format;
mod ops;
mod validate;

use std::collections::{BTreeSet, HashMap};

pub use eval::{evaluate, evaluate_with, wmc, wmc_unchecked};
pub use format::{read_mdd, to_dot, write_mdd};
pub use ops::{dualize, map_labels, project_output, remove_noops, restrict_diagram};
pub use validate::{validate, DiagramClass, ValidationReport};

use crate::error::{Error, Result};
use crate::formula::VarId;

pub type NodeId = usize;

/// A sink label: output `i` is bit `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub u64);

impl Label {
    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Label(
            bits.iter()
                .enumerate()
                .fold(0, |acc, (i, &b)| acc | (u64::from(b) << i)),
        )
    }

    pub fn complement(self, outputs: usize) -> Self {
        Label(!self.0 & mask(outputs))
    }
}

pub(crate) fn mask(outputs: usize) -> u64 {
    if outputs >= 64 {
        u64::MAX
    } else {
        (1u64 << outputs) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Sink(Label),
    Decision { var: VarId, lo: NodeId, hi: NodeId },
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Xor(NodeId, NodeId),
    Equiv(NodeId, NodeId),
    Not(NodeId),
    NoOp(NodeId),
}

impl Node {
    pub fn children(&self) -> impl Iterator<Item = NodeId> {
        let (a, b) = match *self {
            Node::Sink(_) => (None, None),
            Node::Decision { lo, hi, .. } => (Some(lo), Some(hi)),
            Node::And(l, r) | Node::Or(l, r) | Node::Xor(l, r) | Node::Equiv(l, r) => {
                (Some(l), Some(r))
            }
            Node::Not(c) | Node::NoOp(c) => (Some(c), None),
        };
        a.into_iter().chain(b)
    }

    pub fn is_combinator(&self) -> bool {
        matches!(
            self,
            Node::And(..) | Node::Or(..) | Node::Xor(..) | Node::Equiv(..)
        )
    }

    fn remap(&self, f: impl Fn(NodeId) -> NodeId) -> Node {
        match self {
            Node::Sink(l) => Node::Sink(*l),
            Node::Decision { var, lo, hi } => Node::Decision {
                var: var.clone(),
                lo: f(*lo),
                hi: f(*hi),
            },
            Node::And(l, r) => Node::And(f(*l), f(*r)),
            Node::Or(l, r) => Node::Or(f(*l), f(*r)),
            Node::Xor(l, r) => Node::Xor(f(*l), f(*r)),
            Node::Equiv(l, r) => Node::Equiv(f(*l), f(*r)),
            Node::Not(c) => Node::Not(f(*c)),
            Node::NoOp(c) => Node::NoOp(f(*c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagram {
    nodes: Vec<Node>,
    root: NodeId,
    outputs: usize,
    universe: Vec<VarId>,
}

impl Diagram {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Node count, sinks included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// The declared variables: every tested variable plus any extra ones
    /// the diagram was built over.
    pub fn universe(&self) -> &[VarId] {
        &self.universe
    }

    pub fn tested_variables(&self) -> BTreeSet<VarId> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Decision { var, .. } => Some(var.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn count_kind(&self, pred: impl Fn(&Node) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(n)).count()
    }

    /// Widens the declared universe.
    pub fn with_universe<I: IntoIterator<Item = VarId>>(mut self, vars: I) -> Self {
        let mut all: BTreeSet<VarId> = self.universe.drain(..).collect();
        all.extend(vars);
        self.universe = all.into_iter().collect();
        self
    }

    /// Parent lists for every node.
    pub fn parents(&self) -> Vec<Vec<NodeId>> {
        let mut parents = vec![Vec::new(); self.nodes.len()];
        for (id, n) in self.nodes.iter().enumerate() {
            for c in n.children() {
                parents[c].push(id);
            }
        }
        parents
    }

    /// Number of nodes in the sub-DAG below each node.
    pub fn subdag_sizes(&self) -> Vec<usize> {
        use fixedbitset::FixedBitSet;
        let n = self.nodes.len();
        let mut below: Vec<FixedBitSet> = Vec::with_capacity(n);
        for (id, node) in self.nodes.iter().enumerate() {
            let mut set = FixedBitSet::with_capacity(n);
            set.insert(id);
            for c in node.children() {
                set.union_with(&below[c]);
            }
            below.push(set);
        }
        below.iter().map(|s| s.count_ones(..)).collect()
    }
}

/// Incremental construction of a [`Diagram`].
///
/// Sinks are shared per label; every other node is appended as given.
#[derive(Clone, Debug)]
pub struct DiagramBuilder {
    nodes: Vec<Node>,
    outputs: usize,
    sinks: HashMap<Label, NodeId>,
    universe: BTreeSet<VarId>,
}

impl DiagramBuilder {
    pub fn new(outputs: usize) -> Self {
        assert!((1..=64).contains(&outputs), "1..=64 outputs supported");
        DiagramBuilder {
            nodes: Vec::new(),
            outputs,
            sinks: HashMap::new(),
            universe: BTreeSet::new(),
        }
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn sink(&mut self, label: Label) -> NodeId {
        let label = Label(label.0 & mask(self.outputs));
        if let Some(&id) = self.sinks.get(&label) {
            return id;
        }
        let id = self.push_raw(Node::Sink(label));
        self.sinks.insert(label, id);
        id
    }

    pub fn constant(&mut self, value: bool) -> NodeId {
        self.sink(Label(if value { u64::MAX } else { 0 }))
    }

    pub fn decision(&mut self, var: VarId, lo: NodeId, hi: NodeId) -> NodeId {
        self.push(Node::Decision { var, lo, hi })
    }

    /// Appends a node; its children must already exist.
    pub fn push(&mut self, node: Node) -> NodeId {
        if let Node::Sink(l) = node {
            return self.sink(l);
        }
        self.push_raw(node)
    }

    fn push_raw(&mut self, node: Node) -> NodeId {
        for c in node.children() {
            assert!(c < self.nodes.len(), "child {c} does not precede its parent");
        }
        if let Node::Decision { var, .. } = &node {
            if !self.universe.contains(var) {
                self.universe.insert(var.clone());
            }
        }
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Copies the reachable part of `d` in, relabeling its sinks, and
    /// returns the id of the copied root.
    pub fn embed(&mut self, d: &Diagram, relabel: impl Fn(Label) -> Label) -> NodeId {
        let mut target: Vec<NodeId> = Vec::with_capacity(d.size());
        for node in d.nodes() {
            let id = match node {
                Node::Sink(l) => self.sink(relabel(*l)),
                other => self.push(other.remap(|c| target[c])),
            };
            target.push(id);
        }
        self.universe.extend(d.universe().iter().cloned());
        target[d.root()]
    }

    pub fn declare<I: IntoIterator<Item = VarId>>(&mut self, vars: I) {
        self.universe.extend(vars);
    }

    /// Keeps the nodes reachable from `root`, preserving their relative
    /// order, so the root ends up last.
    pub fn finish(self, root: NodeId) -> Diagram {
        let n = self.nodes.len();
        assert!(root < n, "root {root} out of range");
        let mut reach = vec![false; n];
        reach[root] = true;
        for id in (0..=root).rev() {
            if reach[id] {
                for c in self.nodes[id].children() {
                    reach[c] = true;
                }
            }
        }
        let mut new_id = vec![usize::MAX; n];
        let mut nodes = Vec::new();
        for (id, node) in self.nodes.into_iter().enumerate() {
            if reach[id] {
                new_id[id] = nodes.len();
                nodes.push(node.remap(|c| new_id[c]));
            }
        }
        let root = nodes.len() - 1;
        Diagram {
            nodes,
            root,
            outputs: self.outputs,
            universe: self.universe.into_iter().collect(),
        }
    }
}

impl Diagram {
    /// Rebuilds a diagram from raw parts, checking the storage invariants.
    pub fn from_parts(nodes: Vec<Node>, outputs: usize, universe: Vec<VarId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidDiagram("no nodes".into()));
        }
        if !(1..=64).contains(&outputs) {
            return Err(Error::InvalidDiagram(format!("{outputs} outputs")));
        }
        for (id, n) in nodes.iter().enumerate() {
            if let Some(c) = n.children().find(|&c| c >= id) {
                return Err(Error::InvalidDiagram(format!(
                    "node {id} refers to node {c}, which does not precede it"
                )));
            }
            if let Node::Sink(l) = n {
                if l.0 & !mask(outputs) != 0 {
                    return Err(Error::InvalidDiagram(format!(
                        "sink {id} label wider than {outputs} outputs"
                    )));
                }
            }
        }
        let mut all: BTreeSet<VarId> = universe.into_iter().collect();
        for n in &nodes {
            if let Node::Decision { var, .. } = n {
                all.insert(var.clone());
            }
        }
        let root = nodes.len() - 1;
        Ok(Diagram {
            nodes,
            root,
            outputs,
            universe: all.into_iter().collect(),
        })
    }
}
