//! DPLL-style compilation of composite lineages into decision diagrams.
//!
//! The compiler explores residual formulas by Shannon expansion, splits
//! variable-disjoint components into decomposable combinator nodes and
//! caches every residual it has already compiled. The recursion trace is
//! the returned diagram.

use std::collections::HashMap;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::diagram::{Diagram, DiagramBuilder, Node, NodeId};
use crate::error::{Error, Result};
use crate::formula::{UnionFind, VarId};
use crate::lineage::{CombinatorFn, CompositeLineage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Smallest unset variable in the canonical order.
    #[default]
    FirstUnset,
    /// Variable in the most residual terms, lowest variable on ties.
    MaxOccurrence,
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "first-unset" => Ok(Heuristic::FirstUnset),
            "max-occurrence" => Ok(Heuristic::MaxOccurrence),
            _ => Err(format!("unknown heuristic `{s}` (first-unset, max-occurrence)")),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::FirstUnset => "first-unset",
            Heuristic::MaxOccurrence => "max-occurrence",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NegationMode {
    /// Components of the DNF view become `Or` nodes.
    #[default]
    DirectDnf,
    /// The root negates the formula and components of the resulting CNF
    /// become `And` nodes.
    NegateToCnf,
}

impl FromStr for NegationMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "direct-dnf" => Ok(NegationMode::DirectDnf),
            "negate-to-cnf" => Ok(NegationMode::NegateToCnf),
            _ => Err(format!("unknown negation mode `{s}` (direct-dnf, negate-to-cnf)")),
        }
    }
}

impl fmt::Display for NegationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NegationMode::DirectDnf => "direct-dnf",
            NegationMode::NegateToCnf => "negate-to-cnf",
        })
    }
}

pub const DEFAULT_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileConfig {
    pub heuristic: Heuristic,
    pub negation_mode: NegationMode,
    /// Maximum number of diagram nodes, sinks included.
    pub budget: usize,
    pub cache: bool,
    /// With splitting off the trace is a plain FBDD.
    pub components: bool,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            heuristic: Heuristic::FirstUnset,
            negation_mode: NegationMode::DirectDnf,
            budget: DEFAULT_BUDGET,
            cache: true,
            components: true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompileStats {
    pub nodes_created: usize,
    pub cache_hits: usize,
    pub cache_misses: usize,
    pub decisions: usize,
    pub component_splits: usize,
    pub elapsed: Duration,
}

/// Compiles `psi` into a diagram computing it.
///
/// Runs on a dedicated thread with a large stack, since the recursion depth
/// grows with the number of variables.
pub fn compile(psi: &CompositeLineage, cfg: &CompileConfig) -> Result<(Diagram, CompileStats)> {
    if cfg.budget == 0 {
        return Err(Error::Unsupported("node budget must be positive".into()));
    }
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(512 << 20)
            .spawn_scoped(s, || compile_here(psi, cfg))
            .expect("spawn compiler thread")
            .join()
            .expect("compiler thread panicked")
    })
}

fn compile_here(psi: &CompositeLineage, cfg: &CompileConfig) -> Result<(Diagram, CompileStats)> {
    let start = Instant::now();
    let vars: Vec<VarId> = psi.variables().into_iter().collect();
    let index: HashMap<&VarId, u32> = vars.iter().zip(0u32..).collect();
    let args: Vec<Rc<Dnf>> = psi
        .args()
        .iter()
        .map(|a| {
            Rc::new(Dnf::from_terms(
                a.terms()
                    .iter()
                    .map(|t| t.iter().map(|v| index[v]).collect::<Vec<u32>>())
                    .collect(),
            ))
        })
        .collect();
    let mut c = Compiler {
        cfg,
        vars: &vars,
        b: DiagramBuilder::new(1),
        cache: HashMap::new(),
        counts: vec![0; vars.len()],
        combs: HashMap::new(),
        comb_list: Vec::new(),
        stats: CompileStats::default(),
    };
    let root = c.residual(psi.combinator().clone(), args);
    let out = match cfg.negation_mode {
        NegationMode::DirectDnf => c.go(&root, false),
        NegationMode::NegateToCnf => c.go(&root, true).and_then(|n| c.node(Node::Not(n))),
    };
    c.stats.elapsed = start.elapsed();
    match out {
        Ok(root) => {
            c.stats.nodes_created = c.b.len();
            let mut b = c.b;
            b.declare(vars.iter().cloned());
            Ok((b.finish(root), c.stats))
        }
        Err(Error::BudgetExhausted { budget, .. }) => {
            c.stats.nodes_created = c.b.len();
            Err(Error::BudgetExhausted {
                budget,
                stats: Some(Box::new(c.stats)),
            })
        }
        Err(e) => Err(e),
    }
}

const SEP: u32 = u32::MAX;

/// A monotone DNF over interned variables: each term sorted and followed by
/// `SEP`, terms in lexicographic order, no term containing another.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Dnf {
    data: Vec<u32>,
    /// Fingerprint of `data`, computed once.
    fp: u128,
}

struct Terms<'a> {
    data: &'a [u32],
}

impl<'a> Iterator for Terms<'a> {
    type Item = &'a [u32];

    fn next(&mut self) -> Option<&'a [u32]> {
        let end = self.data.iter().position(|&x| x == SEP)?;
        let t = &self.data[..end];
        self.data = &self.data[end + 1..];
        Some(t)
    }
}

fn subset(small: &[u32], big: &[u32]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for &x in small {
        while j < big.len() && big[j] < x {
            j += 1;
        }
        if j == big.len() || big[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

fn fingerprint<T: Hash + ?Sized>(value: &T) -> u128 {
    let half = |salt: u64| {
        let mut h = DefaultHasher::new();
        salt.hash(&mut h);
        value.hash(&mut h);
        h.finish()
    };
    (u128::from(half(0x9e37_79b9_7f4a_7c15)) << 64) | u128::from(half(0xc2b2_ae3d_27d4_eb4f))
}

impl Dnf {
    fn from_data(data: Vec<u32>) -> Self {
        let fp = fingerprint(data.as_slice());
        Dnf { data, fp }
    }

    /// From terms that are already an antichain (a canonical formula).
    fn from_terms(mut ts: Vec<Vec<u32>>) -> Self {
        for t in ts.iter_mut() {
            t.sort_unstable();
        }
        ts.sort_unstable();
        let mut data = Vec::with_capacity(ts.iter().map(|t| t.len() + 1).sum());
        for t in ts {
            data.extend(t);
            data.push(SEP);
        }
        Dnf::from_data(data)
    }

    /// Terms given in canonical order already.
    fn from_sorted<'a>(ts: impl IntoIterator<Item = &'a [u32]>) -> Self {
        let mut data = Vec::new();
        for t in ts {
            data.extend_from_slice(t);
            data.push(SEP);
        }
        Dnf::from_data(data)
    }

    fn terms(&self) -> Terms<'_> {
        Terms { data: &self.data }
    }

    fn as_constant(&self) -> Option<bool> {
        match self.data.as_slice() {
            [] => Some(false),
            [SEP] => Some(true),
            _ => None,
        }
    }

    fn mentions(&self, v: u32) -> bool {
        self.data.contains(&v)
    }

    /// `None` when `v` does not occur.
    fn restrict(&self, v: u32, value: bool) -> Option<Dnf> {
        if !self.mentions(v) {
            return None;
        }
        if !value {
            return Some(Dnf::from_sorted(self.terms().filter(|t| t.binary_search(&v).is_err())));
        }
        let mut shrunk: Vec<Vec<u32>> = Vec::new();
        for t in self.terms() {
            if let Ok(pos) = t.binary_search(&v) {
                if t.len() == 1 {
                    return Some(Dnf::from_data(vec![SEP]));
                }
                let mut s = t.to_vec();
                s.remove(pos);
                shrunk.push(s);
            }
        }
        // Shrunk terms are pairwise incomparable; they can only absorb
        // untouched terms.
        let mut kept: Vec<Vec<u32>> = self
            .terms()
            .filter(|t| t.binary_search(&v).is_err() && !shrunk.iter().any(|s| subset(s, t)))
            .map(|t| t.to_vec())
            .collect();
        kept.extend(shrunk);
        Some(Dnf::from_terms(kept))
    }
}

#[derive(Clone, Debug)]
struct Residual {
    comb: u32,
    args: Vec<Rc<Dnf>>,
}

impl Residual {
    /// 128-bit fingerprint of the canonical serialization of the residual
    /// and the requested polarity.
    fn key(&self, negated: bool) -> u128 {
        let parts: Vec<u128> = self.args.iter().map(|a| a.fp).collect();
        fingerprint(&(self.comb, negated, parts))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    And,
    Or,
    Xor,
}

enum Split {
    /// The function ignores the second part entirely.
    First(CombinatorFn),
    /// The function ignores the first part entirely.
    Second(CombinatorFn),
    Both(Op, CombinatorFn, CombinatorFn),
}

/// Decomposition is only attempted for combinators this small.
const MAX_SPLIT_ARITY: usize = 8;

struct Compiler<'a> {
    cfg: &'a CompileConfig,
    vars: &'a [VarId],
    b: DiagramBuilder,
    cache: HashMap<u128, NodeId>,
    /// Dense scratch space indexed by variable.
    counts: Vec<usize>,
    combs: HashMap<Rc<CombinatorFn>, u32>,
    comb_list: Vec<Rc<CombinatorFn>>,
    stats: CompileStats,
}

impl Compiler<'_> {
    fn intern(&mut self, f: CombinatorFn) -> u32 {
        let f = f.table_only();
        if let Some(&id) = self.combs.get(&f) {
            return id;
        }
        let rc = Rc::new(f);
        let id = self.comb_list.len() as u32;
        self.comb_list.push(rc.clone());
        self.combs.insert(rc, id);
        id
    }

    /// Folds constant arguments and arguments the combinator ignores.
    fn residual(&mut self, mut comb: CombinatorFn, mut args: Vec<Rc<Dnf>>) -> Residual {
        let mut p = args.len();
        while p > 0 {
            p -= 1;
            if let Some(b) = args[p].as_constant() {
                comb = comb.fix(p, b);
                args.remove(p);
            } else if comb.depends_on(p).is_none() {
                comb = comb.fix(p, false);
                args.remove(p);
            }
        }
        Residual {
            comb: self.intern(comb),
            args,
        }
    }

    fn node(&mut self, n: Node) -> Result<NodeId> {
        if self.b.len() >= self.cfg.budget {
            return Err(Error::BudgetExhausted {
                budget: self.cfg.budget,
                stats: None,
            });
        }
        Ok(self.b.push(n))
    }

    fn sink(&mut self, value: bool) -> Result<NodeId> {
        if self.b.len() >= self.cfg.budget {
            return Err(Error::BudgetExhausted {
                budget: self.cfg.budget,
                stats: None,
            });
        }
        Ok(self.b.constant(value))
    }

    /// A node computing the residual, or its negation when `negated`.
    fn go(&mut self, r: &Residual, negated: bool) -> Result<NodeId> {
        if r.args.is_empty() {
            let value = self.comb_list[r.comb as usize].eval(0);
            return self.sink(value != negated);
        }
        let key = self.cfg.cache.then(|| r.key(negated));
        if let Some(key) = &key {
            if let Some(&id) = self.cache.get(key) {
                self.stats.cache_hits += 1;
                return Ok(id);
            }
            self.stats.cache_misses += 1;
        }
        let id = match self.try_split(r, negated)? {
            Some(id) => id,
            None => self.decide(r, negated)?,
        };
        if let Some(key) = key {
            self.cache.insert(key, id);
        }
        Ok(id)
    }

    fn decide(&mut self, r: &Residual, negated: bool) -> Result<NodeId> {
        let v = self.pick(r);
        let comb = self.comb_list[r.comb as usize].as_ref().clone();
        let restrict = |value: bool| -> Vec<Rc<Dnf>> {
            r.args
                .iter()
                .map(|a| a.restrict(v, value).map_or_else(|| a.clone(), Rc::new))
                .collect()
        };
        let lo_args = restrict(false);
        let lo_r = self.residual(comb.clone(), lo_args);
        let lo = self.go(&lo_r, negated)?;
        let hi_args = restrict(true);
        let hi_r = self.residual(comb, hi_args);
        let hi = self.go(&hi_r, negated)?;
        self.stats.decisions += 1;
        self.node(Node::Decision {
            var: self.vars[v as usize].clone(),
            lo,
            hi,
        })
    }

    fn pick(&mut self, r: &Residual) -> u32 {
        let occurrences = || r.args.iter().flat_map(|a| a.data.iter().copied().filter(|&x| x != SEP));
        match self.cfg.heuristic {
            Heuristic::FirstUnset => occurrences()
                .min()
                .expect("non-constant residual mentions a variable"),
            Heuristic::MaxOccurrence => {
                let mut best: Option<(usize, u32)> = None;
                for x in occurrences() {
                    self.counts[x as usize] += 1;
                }
                for x in occurrences() {
                    let c = self.counts[x as usize];
                    if best.is_none_or(|(bc, bx)| c > bc || (c == bc && x < bx)) {
                        best = Some((c, x));
                    }
                }
                for x in occurrences() {
                    self.counts[x as usize] = 0;
                }
                best.expect("non-constant residual mentions a variable").1
            }
        }
    }

    fn try_split(&mut self, r: &Residual, negated: bool) -> Result<Option<NodeId>> {
        if !self.cfg.components || r.args.len() > MAX_SPLIT_ARITY {
            return Ok(None);
        }
        // Union-find over variables, linking the variables of every term.
        let mut uf = UnionFind::new(self.vars.len());
        let mut smallest = u32::MAX;
        for a in &r.args {
            for t in a.terms() {
                smallest = smallest.min(t[0]);
                for w in t.windows(2) {
                    uf.union(w[0] as usize, w[1] as usize);
                }
            }
        }
        let first = uf.find(smallest as usize);
        let split = r
            .args
            .iter()
            .any(|a| a.terms().any(|t| uf.find(t[0] as usize) != first));
        if !split {
            return Ok(None);
        }
        let (mut part1, mut part2) = (Vec::new(), Vec::new());
        let (mut supp1, mut supp2) = (0usize, 0usize);
        for (p, a) in r.args.iter().enumerate() {
            let (t1, t2): (Vec<&[u32]>, Vec<&[u32]>) =
                a.terms().partition(|t| uf.find(t[0] as usize) == first);
            if !t1.is_empty() {
                supp1 |= 1 << p;
            }
            if !t2.is_empty() {
                supp2 |= 1 << p;
            }
            part1.push(Rc::new(Dnf::from_sorted(t1)));
            part2.push(Rc::new(Dnf::from_sorted(t2)));
        }
        let comb = self.comb_list[r.comb as usize].clone();
        let Some(s) = decompose(&comb, supp1, supp2) else {
            return Ok(None);
        };
        self.stats.component_splits += 1;
        match s {
            Split::First(g1) => {
                let r1 = self.residual(g1, part1);
                self.go(&r1, negated).map(Some)
            }
            Split::Second(g2) => {
                let r2 = self.residual(g2, part2);
                self.go(&r2, negated).map(Some)
            }
            Split::Both(op, g1, g2) => {
                let r1 = self.residual(g1, part1);
                let r2 = self.residual(g2, part2);
                let dnf = self.cfg.negation_mode == NegationMode::DirectDnf;
                let id = match (op, negated) {
                    (Op::Or, false) if dnf => {
                        let (x, y) = (self.go(&r1, false)?, self.go(&r2, false)?);
                        self.node(Node::Or(x, y))?
                    }
                    (Op::Or, false) => {
                        // ¬(¬a ∧ ¬b)
                        let (x, y) = (self.go(&r1, true)?, self.go(&r2, true)?);
                        let a = self.node(Node::And(x, y))?;
                        self.node(Node::Not(a))?
                    }
                    (Op::Or, true) => {
                        let (x, y) = (self.go(&r1, true)?, self.go(&r2, true)?);
                        self.node(Node::And(x, y))?
                    }
                    (Op::And, false) => {
                        let (x, y) = (self.go(&r1, false)?, self.go(&r2, false)?);
                        self.node(Node::And(x, y))?
                    }
                    (Op::And, true) => {
                        let (x, y) = (self.go(&r1, false)?, self.go(&r2, false)?);
                        let a = self.node(Node::And(x, y))?;
                        self.node(Node::Not(a))?
                    }
                    (Op::Xor, negated) => {
                        let (x, y) = (self.go(&r1, negated)?, self.go(&r2, false)?);
                        self.node(Node::Xor(x, y))?
                    }
                };
                Ok(Some(id))
            }
        }
    }
}

fn submasks(mask: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(0usize);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}

/// Writes `f(a ∨ b)`, with `a` ranging over the first part's arguments and
/// `b` over the second's, as `g1(a) op g2(b)` when possible.
fn decompose(f: &CombinatorFn, supp1: usize, supp2: usize) -> Option<Split> {
    let cols: Vec<usize> = submasks(supp2).collect();
    let row = |a: usize| -> Vec<bool> { cols.iter().map(|&b| f.eval(a | b)).collect() };
    let mut distinct: Vec<Vec<bool>> = Vec::new();
    for a in submasks(supp1) {
        let r = row(a);
        if !distinct.contains(&r) {
            if distinct.len() == 2 {
                return None;
            }
            distinct.push(r);
        }
    }
    let m = f.arity();
    let col_index = |b: usize| cols.binary_search(&b).ok();
    let g_from_row = |r: Vec<bool>| {
        CombinatorFn::from_fn(m, move |x| {
            col_index(x & supp2).map(|i| r[i]).unwrap_or(false)
        })
    };
    if distinct.len() == 1 {
        return Some(Split::Second(g_from_row(distinct.pop().unwrap())));
    }
    let (r, s) = (&distinct[0], &distinct[1]);
    let all = |v: &[bool], b: bool| v.iter().all(|&x| x == b);
    let is_row = |target: Vec<bool>| {
        let row = &row;
        CombinatorFn::from_fn(m, move |x| row(x & supp1) == target)
    };
    // Rows {0, 1} mean the second part is ignored.
    if (all(r, false) && all(s, true)) || (all(r, true) && all(s, false)) {
        let ones = if all(r, true) { r.clone() } else { s.clone() };
        return Some(Split::First(is_row(ones)));
    }
    for (z, o) in [(r, s), (s, r)] {
        if all(z, false) {
            return Some(Split::Both(Op::And, is_row(o.clone()), g_from_row(o.clone())));
        }
        if all(z, true) {
            return Some(Split::Both(Op::Or, is_row(z.clone()), g_from_row(o.clone())));
        }
    }
    if r.iter().zip(s).all(|(x, y)| x != y) {
        return Some(Split::Both(Op::Xor, is_row(s.clone()), g_from_row(r.clone())));
    }
    None
}
