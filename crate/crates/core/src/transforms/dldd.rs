//! Quasi-polynomial conversion of DLDDs into FBDDs.
//!
//! Each node is translated under a polarity and a pair of continuation
//! targets standing in for the 0- and 1-sinks. A combinator keeps its
//! heavier child as the continuation and threads a private copy of the
//! lighter child in front of it; NOT flips the polarity, which is the same
//! as switching between the diagram and its dual.

use std::collections::HashMap;

use crate::diagram::{validate, Diagram, DiagramBuilder, DiagramClass, Node, NodeId};
use crate::error::{Error, Result};

const STACK_BYTES: usize = 256 << 20;

/// `N · 2^{⌈log₂ N⌉²}`, saturating.
pub fn quasi_poly_bound(n: usize) -> u128 {
    if n <= 1 {
        return n as u128;
    }
    let log = usize::BITS - (n - 1).leading_zeros();
    let exp = log * log;
    if exp >= 127 {
        return u128::MAX;
    }
    (n as u128).saturating_mul(1u128 << exp)
}

#[derive(Clone, Copy)]
enum Rule {
    And,
    Or,
    Xor,
    Equiv,
}

struct Translator<'a> {
    d: &'a Diagram,
    sizes: Vec<usize>,
    b: DiagramBuilder,
    memo: HashMap<(NodeId, bool, NodeId, NodeId), NodeId>,
    budget: usize,
}

impl Translator<'_> {
    fn split(&self, l: NodeId, r: NodeId) -> (NodeId, NodeId) {
        if self.sizes[l] <= self.sizes[r] {
            (l, r)
        } else {
            (r, l)
        }
    }

    fn check(&self) -> Result<()> {
        if self.b.len() > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
                stats: None,
            });
        }
        Ok(())
    }

    /// `pos` translates the node itself, `!pos` its negation.
    fn go(&mut self, u: NodeId, pos: bool, c0: NodeId, c1: NodeId) -> Result<NodeId> {
        if let Some(&id) = self.memo.get(&(u, pos, c0, c1)) {
            return Ok(id);
        }
        let out = match self.d.node(u).clone() {
            Node::Sink(l) => {
                if l.bit(0) == pos {
                    c1
                } else {
                    c0
                }
            }
            Node::Decision { var, lo, hi } => {
                let lo = self.go(lo, pos, c0, c1)?;
                let hi = self.go(hi, pos, c0, c1)?;
                self.check()?;
                self.b.decision(var, lo, hi)
            }
            Node::Not(c) => self.go(c, !pos, c0, c1)?,
            Node::NoOp(c) => self.go(c, pos, c0, c1)?,
            Node::And(l, r) => {
                let rule = if pos { Rule::And } else { Rule::Or };
                self.combine(rule, pos, l, r, c0, c1)?
            }
            Node::Or(l, r) => {
                let rule = if pos { Rule::Or } else { Rule::And };
                self.combine(rule, pos, l, r, c0, c1)?
            }
            Node::Xor(l, r) => {
                let rule = if pos { Rule::Xor } else { Rule::Equiv };
                self.combine(rule, true, l, r, c0, c1)?
            }
            Node::Equiv(l, r) => {
                let rule = if pos { Rule::Equiv } else { Rule::Xor };
                self.combine(rule, true, l, r, c0, c1)?
            }
        };
        self.memo.insert((u, pos, c0, c1), out);
        Ok(out)
    }

    fn combine(
        &mut self,
        rule: Rule,
        pol: bool,
        l: NodeId,
        r: NodeId,
        c0: NodeId,
        c1: NodeId,
    ) -> Result<NodeId> {
        let (light, heavy) = self.split(l, r);
        match rule {
            Rule::And => {
                let h = self.go(heavy, pol, c0, c1)?;
                self.go(light, pol, c0, h)
            }
            Rule::Or => {
                let h = self.go(heavy, pol, c0, c1)?;
                self.go(light, pol, h, c1)
            }
            Rule::Xor => {
                let hp = self.go(heavy, true, c0, c1)?;
                let hn = self.go(heavy, false, c0, c1)?;
                self.go(light, true, hp, hn)
            }
            Rule::Equiv => {
                let hp = self.go(heavy, true, c0, c1)?;
                let hn = self.go(heavy, false, c0, c1)?;
                self.go(light, true, hn, hp)
            }
        }
    }
}

/// An FBDD equivalent to the single-output DLDD `d`, with at most `budget`
/// nodes.
pub fn dldd_to_fbdd(d: &Diagram, budget: usize) -> Result<Diagram> {
    if d.outputs() != 1 {
        return Err(Error::Unsupported(format!(
            "conversion needs a single-output diagram, got {} outputs",
            d.outputs()
        )));
    }
    let report = validate(d);
    if report.class == DiagramClass::Invalid {
        return Err(Error::InvalidDiagram(report.describe()));
    }
    let run = || {
        let mut b = DiagramBuilder::new(1);
        b.declare(d.universe().iter().cloned());
        let c0 = b.constant(false);
        let c1 = b.constant(true);
        let mut t = Translator {
            d,
            sizes: d.subdag_sizes(),
            b,
            memo: HashMap::new(),
            budget,
        };
        let root = t.go(d.root(), true, c0, c1)?;
        Ok(t.b.finish(root))
    };
    let out: Result<Diagram> = std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(STACK_BYTES)
            .spawn_scoped(s, run)
            .expect("spawn conversion thread")
            .join()
            .expect("conversion thread panicked")
    });
    let out = out?;
    debug_assert!(out.size() as u128 <= quasi_poly_bound(d.size()));
    Ok(out)
}
