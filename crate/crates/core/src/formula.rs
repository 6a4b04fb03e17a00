//! Monotone DNF formulas over structured tuple variables.
//!
//! Every lineage handled by this crate is a positive DNF; negation only ever
//! appears one level up, in combinators and diagrams.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// A tuple variable.
///
/// The derived order is the canonical variable order: relation kind first
/// (`R < S < T < symbol`), then the relation index, then row, then column.
/// `S { rel: 0, .. }` is the single binary relation of `H_0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    R(u32),
    S { rel: u32, row: u32, col: u32 },
    T(u32),
    Sym(Arc<str>),
}

impl VarId {
    pub fn s(rel: u32, row: u32, col: u32) -> Self {
        VarId::S { rel, row, col }
    }

    pub fn sym(name: &str) -> Self {
        VarId::Sym(Arc::from(name))
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::R(i) => write!(f, "R({i})"),
            VarId::S { rel: 0, row, col } => write!(f, "S({row},{col})"),
            VarId::S { rel, row, col } => write!(f, "S{rel}({row},{col})"),
            VarId::T(j) => write!(f, "T({j})"),
            VarId::Sym(s) => f.write_str(s),
        }
    }
}

impl FromStr for VarId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err("empty variable name".into());
        }
        if s.contains(char::is_whitespace) || s.contains('=') {
            return Err(format!("bad variable name `{s}`"));
        }
        let structured = (|| {
            let open = s.find('(')?;
            if !s.ends_with(')') {
                return None;
            }
            let head = &s[..open];
            let args: Vec<u32> = s[open + 1..s.len() - 1]
                .split(',')
                .map(|a| a.trim().parse::<u32>().ok())
                .collect::<Option<_>>()?;
            match (head, args.as_slice()) {
                ("R", [i]) => Some(VarId::R(*i)),
                ("T", [j]) => Some(VarId::T(*j)),
                ("S", [i, j]) => Some(VarId::s(0, *i, *j)),
                (h, [i, j]) if h.starts_with('S') => {
                    let rel: u32 = h[1..].parse().ok()?;
                    (rel > 0).then(|| VarId::s(rel, *i, *j))
                }
                _ => None,
            }
        })();
        Ok(structured.unwrap_or_else(|| VarId::sym(s)))
    }
}

/// A partial assignment of truth values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Assignment {
    bindings: BTreeMap<VarId, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an assignment, rejecting a variable bound to both values.
    pub fn from_pairs<I: IntoIterator<Item = (VarId, bool)>>(pairs: I) -> Result<Self> {
        let mut a = Assignment::new();
        for (v, b) in pairs {
            a.bind(v, b)?;
        }
        Ok(a)
    }

    pub fn bind(&mut self, var: VarId, value: bool) -> Result<()> {
        match self.bindings.get(&var) {
            Some(&old) if old != value => Err(Error::InvalidAssignment(format!(
                "{var} bound to both 0 and 1"
            ))),
            _ => {
                self.bindings.insert(var, value);
                Ok(())
            }
        }
    }

    pub fn with(mut self, var: VarId, value: bool) -> Result<Self> {
        self.bind(var, value)?;
        Ok(self)
    }

    pub fn union(&self, other: &Assignment) -> Result<Assignment> {
        let mut out = self.clone();
        for (v, &b) in &other.bindings {
            out.bind(v.clone(), b)?;
        }
        Ok(out)
    }

    pub fn get(&self, var: &VarId) -> Option<bool> {
        self.bindings.get(var).copied()
    }

    pub fn contains(&self, var: &VarId) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, bool)> {
        self.bindings.iter().map(|(v, &b)| (v, b))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .bindings
            .iter()
            .map(|(v, b)| format!("{v}={}", u8::from(*b)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Independent variable probabilities, exact rationals in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    weights: BTreeMap<VarId, BigRational>,
    default: BigRational,
}

impl Default for WeightMap {
    fn default() -> Self {
        WeightMap::uniform(BigRational::new(BigInt::one(), BigInt::from(2)))
            .expect("1/2 is a probability")
    }
}

fn check_probability(p: &BigRational) -> Result<()> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::InvalidAssignment(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(())
}

impl WeightMap {
    pub fn uniform(default: BigRational) -> Result<Self> {
        check_probability(&default)?;
        Ok(WeightMap {
            weights: BTreeMap::new(),
            default,
        })
    }

    pub fn set(&mut self, var: VarId, p: BigRational) -> Result<()> {
        check_probability(&p)?;
        self.weights.insert(var, p);
        Ok(())
    }

    pub fn get(&self, var: &VarId) -> &BigRational {
        self.weights.get(var).unwrap_or(&self.default)
    }

    pub fn default_weight(&self) -> &BigRational {
        &self.default
    }

    pub fn explicit(&self) -> impl Iterator<Item = (&VarId, &BigRational)> {
        self.weights.iter()
    }
}

/// A positive DNF kept in canonical form: every term sorted, no term a
/// superset of another, terms sorted lexicographically.
///
/// `⊥` has no terms; `⊤` is exactly the single empty term.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotoneDnf {
    terms: Vec<Vec<VarId>>,
}

fn is_subset(small: &[VarId], big: &[VarId]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for x in small {
        for y in it.by_ref() {
            match y.cmp(x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Pairwise absorption over sorted, deduplicated terms.
fn minimize(mut terms: Vec<Vec<VarId>>) -> Vec<Vec<VarId>> {
    for t in terms.iter_mut() {
        t.sort();
        t.dedup();
    }
    if terms.iter().any(|t| t.is_empty()) {
        return vec![Vec::new()];
    }
    terms.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    terms.dedup();
    let mut kept: Vec<Vec<VarId>> = Vec::with_capacity(terms.len());
    for t in terms {
        if !kept.iter().any(|k| is_subset(k, &t)) {
            kept.push(t);
        }
    }
    kept.sort();
    kept
}

impl MonotoneDnf {
    pub fn bottom() -> Self {
        MonotoneDnf { terms: Vec::new() }
    }

    pub fn top() -> Self {
        MonotoneDnf {
            terms: vec![Vec::new()],
        }
    }

    pub fn constant(value: bool) -> Self {
        if value {
            Self::top()
        } else {
            Self::bottom()
        }
    }

    pub fn new<I, T>(terms: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = VarId>,
    {
        MonotoneDnf {
            terms: minimize(terms.into_iter().map(|t| t.into_iter().collect()).collect()),
        }
    }

    pub fn var(v: VarId) -> Self {
        MonotoneDnf {
            terms: vec![vec![v]],
        }
    }

    pub fn terms(&self) -> &[Vec<VarId>] {
        &self.terms
    }

    pub fn is_top(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].is_empty()
    }

    pub fn is_bottom(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.is_top() || self.is_bottom()
    }

    pub fn as_constant(&self) -> Option<bool> {
        if self.is_top() {
            Some(true)
        } else if self.is_bottom() {
            Some(false)
        } else {
            None
        }
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.iter().flatten().cloned().collect()
    }

    pub fn mentions(&self, v: &VarId) -> bool {
        self.terms.iter().any(|t| t.binary_search(v).is_ok())
    }

    pub fn contains_term(&self, term: &[VarId]) -> bool {
        self.terms.binary_search_by(|t| t.as_slice().cmp(term)).is_ok()
    }

    pub fn or(&self, other: &MonotoneDnf) -> MonotoneDnf {
        MonotoneDnf {
            terms: minimize(self.terms.iter().chain(&other.terms).cloned().collect()),
        }
    }

    pub fn evaluate(&self, theta: &Assignment) -> Result<bool> {
        for t in &self.terms {
            let mut sat = true;
            for v in t {
                match theta.get(v) {
                    Some(true) => {}
                    Some(false) => {
                        sat = false;
                        break;
                    }
                    None => return Err(Error::UnboundVariable(v.to_string())),
                }
            }
            if sat {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `Φ[θ]` in canonical form. Conflicts cannot arise inside an
    /// [`Assignment`], so this never fails for a well-formed θ.
    pub fn restrict(&self, theta: &Assignment) -> MonotoneDnf {
        if theta.is_empty() || self.is_constant() {
            return self.clone();
        }
        let mut unchanged = Vec::with_capacity(self.terms.len());
        let mut shrunk = Vec::new();
        for t in &self.terms {
            let mut falsified = false;
            let mut touched = false;
            for v in t {
                match theta.get(v) {
                    Some(false) => {
                        falsified = true;
                        break;
                    }
                    Some(true) => touched = true,
                    None => {}
                }
            }
            if falsified {
                continue;
            }
            if touched {
                let rest: Vec<VarId> = t.iter().filter(|v| !theta.contains(v)).cloned().collect();
                if rest.is_empty() {
                    return MonotoneDnf::top();
                }
                shrunk.push(rest);
            } else {
                unchanged.push(t.clone());
            }
        }
        if shrunk.is_empty() {
            return MonotoneDnf { terms: unchanged };
        }
        // Unchanged terms are already an antichain and cannot be absorbed by
        // anything except a shrunk term.
        let shrunk = minimize(shrunk);
        unchanged.retain(|t| !shrunk.iter().any(|s| is_subset(s, t)));
        unchanged.extend(shrunk);
        unchanged.sort();
        MonotoneDnf { terms: unchanged }
    }

    /// Single-variable restriction; the hot path of the compiler.
    pub fn restrict_var(&self, var: &VarId, value: bool) -> MonotoneDnf {
        if !value {
            return MonotoneDnf {
                terms: self
                    .terms
                    .iter()
                    .filter(|t| t.binary_search(var).is_err())
                    .cloned()
                    .collect(),
            };
        }
        let mut unchanged = Vec::with_capacity(self.terms.len());
        let mut shrunk = Vec::new();
        for t in &self.terms {
            match t.binary_search(var) {
                Ok(pos) => {
                    if t.len() == 1 {
                        return MonotoneDnf::top();
                    }
                    let mut s = t.clone();
                    s.remove(pos);
                    shrunk.push(s);
                }
                Err(_) => unchanged.push(t.clone()),
            }
        }
        if shrunk.is_empty() {
            return MonotoneDnf { terms: unchanged };
        }
        // Shrunk terms all came from terms containing `var`, so they are
        // mutually incomparable.
        unchanged.retain(|t| !shrunk.iter().any(|s| is_subset(s, t)));
        unchanged.extend(shrunk);
        unchanged.sort();
        MonotoneDnf { terms: unchanged }
    }

    /// The unit variables (1-prime implicants).
    pub fn units(&self) -> Result<BTreeSet<VarId>> {
        if self.is_constant() {
            return Err(Error::ConstantFormula);
        }
        Ok(self.units_or_empty())
    }

    /// Like [`units`](Self::units) but treats constants as unit-free.
    pub fn units_or_empty(&self) -> BTreeSet<VarId> {
        self.terms
            .iter()
            .filter(|t| t.len() == 1)
            .map(|t| t[0].clone())
            .collect()
    }

    /// Number of distinct variables co-occurring with `x` in some term.
    pub fn degree_bound(&self, x: &VarId) -> usize {
        let mut seen = BTreeSet::new();
        for t in &self.terms {
            if t.binary_search(x).is_ok() {
                seen.extend(t.iter().filter(|v| *v != x).cloned());
            }
        }
        seen.len()
    }

    /// `Δ(Φ)`: the maximum of [`degree_bound`](Self::degree_bound) over all variables.
    pub fn max_degree(&self) -> usize {
        let mut co: BTreeMap<&VarId, BTreeSet<&VarId>> = BTreeMap::new();
        for t in &self.terms {
            for v in t {
                let entry = co.entry(v).or_default();
                entry.extend(t.iter().filter(|w| *w != v));
            }
        }
        co.values().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Partition of the terms into variable-disjoint connected groups,
    /// ordered by each group's smallest variable.
    pub fn components(&self) -> Vec<MonotoneDnf> {
        let groups = term_components(self.terms.iter().map(|t| t.as_slice()));
        groups
            .into_iter()
            .map(|idx| MonotoneDnf {
                terms: idx.into_iter().map(|i| self.terms[i].clone()).collect(),
            })
            .collect()
    }
}

impl fmt::Display for MonotoneDnf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_top() {
            return f.write_str("TRUE");
        }
        if self.is_bottom() {
            return f.write_str("FALSE");
        }
        let terms: Vec<String> = self
            .terms
            .iter()
            .map(|t| t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        f.write_str(&terms.join(" | "))
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Groups term indices by connected variable support. Groups come out
/// ordered by their smallest variable; empty terms form their own group.
pub(crate) fn term_components<'a, I>(terms: I) -> Vec<Vec<usize>>
where
    I: IntoIterator<Item = &'a [VarId]>,
{
    let terms: Vec<&[VarId]> = terms.into_iter().collect();
    let mut ids: HashMap<&VarId, usize> = HashMap::new();
    let mut uf = UnionFind::new(terms.len());
    for (ti, t) in terms.iter().enumerate() {
        for v in t.iter() {
            match ids.get(v) {
                Some(&other) => uf.union(ti, other),
                None => {
                    ids.insert(v, ti);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ti in 0..terms.len() {
        let r = uf.find(ti);
        groups.entry(r).or_default().push(ti);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by(|a, b| {
        let ma = a.iter().filter_map(|&i| terms[i].first()).min();
        let mb = b.iter().filter_map(|&i| terms[i].first()).min();
        ma.cmp(&mb)
    });
    out
}
