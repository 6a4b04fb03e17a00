//! FBDDs that follow the unit rule.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;

use crate::diagram::{remove_noops, validate, Diagram, DiagramBuilder, DiagramClass, Node, NodeId};
use crate::error::{Error, Result};
use crate::formula::{MonotoneDnf, VarId};

/// An edge of the input diagram; `Root` is the virtual edge into the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeRef {
    Root,
    Branch { from: NodeId, value: bool },
}

/// The new-unit set of every edge that creates units, each listed in
/// canonical variable order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnitLedger {
    pub edges: BTreeMap<EdgeRef, Vec<VarId>>,
}

impl UnitLedger {
    pub fn total(&self) -> usize {
        self.edges.values().map(Vec::len).sum()
    }
}

fn require_fbdd(f: &Diagram) -> Result<()> {
    let report = validate(f);
    if report.class == DiagramClass::Invalid {
        return Err(Error::InvalidDiagram(report.describe()));
    }
    if f.nodes().iter().any(|n| n.is_combinator() || matches!(n, Node::Not(_))) {
        return Err(Error::InvalidDiagram(format!("expected an FBDD, got {}", report.class)));
    }
    if f.outputs() != 1 {
        return Err(Error::Unsupported(format!("{} outputs", f.outputs())));
    }
    Ok(())
}

/// Residual of `phi` at every reachable node, restricting along the first
/// path that reaches it. Parents have larger ids, so a descending sweep sees
/// every node after at least one of its parents. Every other edge into a
/// node must produce the same residual, and sinks must match their labels;
/// together these verify that `f` computes `phi`.
pub(crate) fn residuals(f: &Diagram, phi: &MonotoneDnf) -> Result<Vec<Option<MonotoneDnf>>> {
    let mut res: Vec<Option<MonotoneDnf>> = vec![None; f.size()];
    res[f.root()] = Some(phi.clone());
    let mismatch = |id: NodeId, want: &MonotoneDnf| {
        Error::WrongFunction(format!("node {id} is reached with residuals that differ, one being {want}"))
    };
    for id in (0..f.size()).rev() {
        let Some(r) = res[id].clone() else { continue };
        let edges: Vec<(NodeId, MonotoneDnf)> = match f.node(id) {
            Node::Decision { var, lo, hi } => {
                vec![(*lo, r.restrict_var(var, false)), (*hi, r.restrict_var(var, true))]
            }
            Node::NoOp(c) => vec![(*c, r)],
            Node::Sink(l) => {
                if r.as_constant() != Some(l.bit(0)) {
                    return Err(Error::WrongFunction(format!(
                        "sink {id} is labeled {} but the residual there is {r}",
                        u8::from(l.bit(0))
                    )));
                }
                vec![]
            }
            _ => vec![],
        };
        for (c, cr) in edges {
            match &res[c] {
                None => res[c] = Some(cr),
                Some(prev) if *prev != cr => return Err(mismatch(c, &cr)),
                Some(_) => {}
            }
        }
    }
    Ok(res)
}

/// Whether every node whose residual has units tests one of them.
pub fn follows_unit_rule(f: &Diagram, phi: &MonotoneDnf) -> Result<bool> {
    require_fbdd(f)?;
    let res = residuals(f, phi)?;
    for (id, node) in f.nodes().iter().enumerate() {
        if let (Node::Decision { var, .. }, Some(r)) = (node, &res[id]) {
            let units = r.units_or_empty();
            if !units.is_empty() && !units.contains(var) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rewrites `f` (an FBDD for `phi`) so that it follows the unit rule.
pub fn to_unit_rule(f: &Diagram, phi: &MonotoneDnf) -> Result<Diagram> {
    to_unit_rule_with_ledger(f, phi).map(|(d, _)| d)
}

/// [`to_unit_rule`], also returning the per-edge new-unit sets.
pub fn to_unit_rule_with_ledger(f: &Diagram, phi: &MonotoneDnf) -> Result<(Diagram, UnitLedger)> {
    require_fbdd(f)?;
    let f = remove_noops(f);
    let res = residuals(&f, phi)?;

    let mut index: HashMap<VarId, usize> = HashMap::new();
    for v in f.universe().iter().cloned().chain(phi.variables()) {
        let next = index.len();
        index.entry(v).or_insert(next);
    }
    let nv = index.len();
    let units: Vec<Vec<VarId>> = res
        .iter()
        .map(|r| r.as_ref().map_or_else(Vec::new, |r| r.units_or_empty().into_iter().collect()))
        .collect();
    let new_units = |from: NodeId, to: NodeId| -> Vec<VarId> {
        units[to].iter().filter(|z| !units[from].contains(z)).cloned().collect()
    };

    let mut ledger = UnitLedger::default();
    if !units[f.root()].is_empty() {
        ledger.edges.insert(EdgeRef::Root, units[f.root()].clone());
    }
    // consumed[w]: units introduced on some edge above w.
    let mut consumed: Vec<FixedBitSet> = vec![FixedBitSet::with_capacity(nv); f.size()];
    for z in &units[f.root()] {
        consumed[f.root()].insert(index[z]);
    }
    for id in (0..f.size()).rev() {
        if res[id].is_none() {
            continue;
        }
        if let Node::Decision { lo, hi, .. } = *f.node(id) {
            for (value, child) in [(false, lo), (true, hi)] {
                let fresh = new_units(id, child);
                let mut set = consumed[id].clone();
                for z in &fresh {
                    set.insert(index[z]);
                }
                consumed[child].union_with(&set);
                if !fresh.is_empty() {
                    ledger.edges.insert(EdgeRef::Branch { from: id, value }, fresh);
                }
            }
        }
    }

    let mut b = DiagramBuilder::new(1);
    b.declare(f.universe().iter().cloned());
    let one = b.constant(true);
    let chain = |b: &mut DiagramBuilder, zs: &[VarId], target: NodeId| -> NodeId {
        zs.iter()
            .rev()
            .fold(target, |next, z| b.decision(z.clone(), next, one))
    };
    let mut target: Vec<NodeId> = Vec::with_capacity(f.size());
    for (id, node) in f.nodes().iter().enumerate() {
        let t = match node {
            Node::Sink(l) => b.sink(*l),
            Node::Decision { var, lo, hi } => {
                if res[id].is_some() && consumed[id].contains(index[var]) {
                    target[*lo]
                } else {
                    let edge = |value: bool| EdgeRef::Branch { from: id, value };
                    let lo_t = match ledger.edges.get(&edge(false)) {
                        Some(zs) => chain(&mut b, zs, target[*lo]),
                        None => target[*lo],
                    };
                    let hi_t = match ledger.edges.get(&edge(true)) {
                        Some(zs) => chain(&mut b, zs, target[*hi]),
                        None => target[*hi],
                    };
                    b.decision(var.clone(), lo_t, hi_t)
                }
            }
            _ => unreachable!("no-op free FBDD"),
        };
        target.push(t);
    }
    let root = match ledger.edges.get(&EdgeRef::Root) {
        Some(zs) => chain(&mut b, zs, target[f.root()]),
        None => target[f.root()],
    };
    Ok((b.finish(root), ledger))
}
