//! Lifted evaluation of safe combinations by Möbius inclusion-exclusion over
//! the clause lattice of the combinator's positive CNF.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::diagram::{map_labels, wmc_unchecked, Label};
use crate::error::{Error, Result};
use crate::formula::{Assignment, WeightMap};
use crate::lineage::CombinatorFn;
use crate::transforms::{build_family_obdd_with, family_size_bound};

/// Argument indices as a bit set.
pub type IndexSet = u32;

fn show(u: IndexSet) -> String {
    let items: Vec<String> = (0..32).filter(|i| u >> i & 1 == 1).map(|i| i.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// The prime implicates of a monotone `f`, each a sorted list of argument
/// indices. `f ≡ 1` has none; `f ≡ 0` has the empty clause.
pub fn positive_cnf(f: &CombinatorFn) -> Result<Vec<Vec<usize>>> {
    if !f.is_monotone() {
        return Err(Error::NotMonotone);
    }
    let m = f.arity();
    let full = (1usize << m) - 1;
    let implicate = |c: usize| !f.eval(full ^ c);
    let mut masks: Vec<usize> = (0..=full).filter(|&c| implicate(c)).collect();
    masks.retain(|&c| (0..m).all(|i| c >> i & 1 == 0 || !implicate(c & !(1 << i))));
    masks.sort_by_key(|c| (c.count_ones(), *c));
    Ok(masks
        .into_iter()
        .map(|c| (0..m).filter(|i| c >> i & 1 == 1).collect())
        .collect())
}

/// Unions of clauses ordered by reverse inclusion, with `1̂ = ∅` on top.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseLattice {
    /// Sorted by size, so `1̂` comes first and `0̂` last.
    pub elements: Vec<IndexSet>,
    /// `μ(u, 1̂)` for each element.
    pub mu: Vec<i64>,
}

impl ClauseLattice {
    pub fn top(&self) -> IndexSet {
        self.elements[0]
    }

    pub fn bottom(&self) -> IndexSet {
        *self.elements.last().unwrap()
    }

    pub fn mu_of(&self, u: IndexSet) -> Option<i64> {
        self.elements.iter().position(|&e| e == u).map(|p| self.mu[p])
    }

    pub fn mu_bottom(&self) -> i64 {
        *self.mu.last().unwrap()
    }

    /// Whether `μ(u,u) = 1` and `μ(u,1̂) = -Σ_{u<w≤1̂} μ(w,1̂)` hold everywhere.
    pub fn recursion_holds(&self) -> bool {
        self.elements.iter().zip(&self.mu).all(|(&u, &m)| {
            if u == self.top() {
                return m == 1;
            }
            let above: i64 = self
                .elements
                .iter()
                .zip(&self.mu)
                .filter(|(&w, _)| w != u && w & u == w)
                .map(|(_, &mw)| mw)
                .sum();
            m == -above
        })
    }
}

impl fmt::Display for ClauseLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (u, m) in self.elements.iter().zip(&self.mu) {
            writeln!(f, "{} mu={m}", show(*u))?;
        }
        Ok(())
    }
}

pub fn build_lattice_and_mobius(clauses: &[Vec<usize>]) -> Result<ClauseLattice> {
    if clauses.is_empty() {
        return Err(Error::Unsupported("the clause lattice needs at least one clause".into()));
    }
    let masks: Vec<IndexSet> = clauses
        .iter()
        .map(|c| c.iter().fold(0, |acc, &i| acc | 1 << i))
        .collect();
    let mut elements: BTreeSet<IndexSet> = BTreeSet::from([0]);
    let mut frontier: Vec<IndexSet> = vec![0];
    while let Some(u) = frontier.pop() {
        for &c in &masks {
            if elements.insert(u | c) {
                frontier.push(u | c);
            }
        }
    }
    let mut elements: Vec<IndexSet> = elements.into_iter().collect();
    elements.sort_by_key(|u| (u.count_ones(), *u));
    let mut mu: Vec<i64> = Vec::with_capacity(elements.len());
    for (p, &u) in elements.iter().enumerate() {
        if p == 0 {
            mu.push(1);
            continue;
        }
        let s: i64 = elements[..p]
            .iter()
            .zip(&mu)
            .filter(|(&w, _)| w & u == w)
            .map(|(_, &m)| m)
            .sum();
        mu.push(-s);
    }
    Ok(ClauseLattice { elements, mu })
}

/// `μ(0̂, 1̂) = 0`.
pub fn is_safe(f: &CombinatorFn) -> Result<bool> {
    let clauses = positive_cnf(f)?;
    if clauses.is_empty() {
        return Ok(true);
    }
    Ok(build_lattice_and_mobius(&clauses)?.mu_bottom() == 0)
}

/// The plain inclusion-exclusion expansion of `Pr[C_1 ∧ ... ∧ C_m]`: one
/// `(sign, ⋃ S)` term per nonempty set `S` of clauses.
pub fn inclusion_exclusion_terms(clauses: &[Vec<usize>]) -> Vec<(i64, IndexSet)> {
    let masks: Vec<IndexSet> = clauses
        .iter()
        .map(|c| c.iter().fold(0, |acc, &i| acc | 1 << i))
        .collect();
    let mut subsets: Vec<usize> = (1..1usize << masks.len()).collect();
    subsets.sort_by_key(|s| (s.count_ones(), *s));
    subsets
        .into_iter()
        .map(|s| {
            let sign = if s.count_ones() % 2 == 1 { 1 } else { -1 };
            let u = (0..masks.len()).filter(|i| s >> i & 1 == 1).fold(0, |acc, i| acc | masks[i]);
            (sign, u)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedTerm {
    pub element: IndexSet,
    pub mu: i64,
    /// `Pr[⋁_{ℓ ∈ element} h_kℓ]`.
    pub probability: BigRational,
    pub obdd_nodes: usize,
}

impl LiftedTerm {
    pub fn element_string(&self) -> String {
        show(self.element)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedReport {
    pub probability: BigRational,
    pub terms: Vec<LiftedTerm>,
    pub lattice_size: usize,
}

impl LiftedReport {
    pub fn obdd_nodes(&self) -> usize {
        self.terms.iter().map(|t| t.obdd_nodes).sum()
    }
}

pub fn lifted_wmc(f: &CombinatorFn, k: usize, n: usize, w: &WeightMap) -> Result<BigRational> {
    lifted_wmc_detailed(f, k, n, w).map(|r| r.probability)
}

/// `Pr[f(h_k0, ..., h_kk)] = -Σ_{u<1̂, μ(u,1̂)≠0} μ(u,1̂) · Pr[⋁_{ℓ∈u} h_kℓ]`,
/// each term read off a transversal-free family OBDD.
pub fn lifted_wmc_detailed(f: &CombinatorFn, k: usize, n: usize, w: &WeightMap) -> Result<LiftedReport> {
    if k == 0 {
        return Err(Error::Unsupported("lifted evaluation needs k >= 1".into()));
    }
    if f.arity() != k + 1 {
        return Err(Error::Unsupported(format!(
            "combinator arity {} but the family has {} members",
            f.arity(),
            k + 1
        )));
    }
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let clauses = positive_cnf(f)?;
    if clauses.is_empty() || clauses.iter().any(|c| c.is_empty()) {
        let value = if clauses.is_empty() { BigRational::one() } else { BigRational::zero() };
        return Ok(LiftedReport {
            probability: value,
            terms: Vec::new(),
            lattice_size: 0,
        });
    }
    let lattice = build_lattice_and_mobius(&clauses)?;
    if lattice.mu_bottom() != 0 {
        return Err(Error::UnsafeQuery(lattice.mu_bottom().to_string()));
    }
    let all: IndexSet = (1 << (k + 1)) - 1;
    let mut total = BigRational::zero();
    let mut terms = Vec::new();
    for (&u, &m) in lattice.elements.iter().zip(&lattice.mu) {
        if u == lattice.top() || m == 0 {
            continue;
        }
        if u == all {
            return Err(Error::InternalSafetyViolation(show(u)));
        }
        let subset: BTreeSet<usize> = (0..=k).filter(|l| u >> l & 1 == 1).collect();
        let fam = build_family_obdd_with(&Assignment::new(), &subset, k, n, 0)?;
        let nodes = fam.diagram.size();
        debug_assert!(nodes as u128 <= family_size_bound(k, 0, n));
        let d = map_labels(&fam.diagram, 1, |l| Label(u64::from(l.0 & u as u64 != 0)));
        let p = wmc_unchecked(&d, w).swap_remove(0);
        total -= BigRational::from_integer(m.into()) * &p;
        terms.push(LiftedTerm {
            element: u,
            mu: m,
            probability: p,
            obdd_nodes: nodes,
        });
    }
    Ok(LiftedReport {
        probability: total,
        terms,
        lattice_size: lattice.elements.len(),
    })
}
