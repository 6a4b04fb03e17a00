//! Classification of `g(H_k0, ..., H_kk, B_0, ..., B_{k+1})` and the
//! layered FBDD for the easy side.

use std::collections::HashSet;

use crate::diagram::{Diagram, DiagramBuilder, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Assignment, MonotoneDnf, VarId};
use crate::lineage::{ground_hk_family, hk_variables, project_g_at_ones, CombinatorFn};

use super::family_obdd::{emit_family, Emit, FamilyStats, ObddMemo};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dichotomy {
    /// `g(X, 1)` depends on every `X_ℓ`.
    Hard,
    /// `g(X, 1)` ignores `X_s`.
    Easy(usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DichotomyStats {
    /// Tree layers testing the `B` queries plus the final OBDD layer.
    pub layers: usize,
    pub tree_nodes: usize,
    pub leaves: usize,
    pub family: FamilyStats,
}

pub fn classify_dichotomy(g: &CombinatorFn, k: usize) -> Result<Dichotomy> {
    let f = project_g_at_ones(g, k)?;
    Ok(match (0..=k).find(|&l| f.depends_on(l).is_none()) {
        Some(s) => Dichotomy::Easy(s),
        None => Dichotomy::Hard,
    })
}

pub fn build_dichotomy_fbdd(g: &CombinatorFn, k: usize, n: usize) -> Result<Diagram> {
    build_dichotomy_fbdd_with_stats(g, k, n).map(|(d, _)| d)
}

/// Layer `ℓ ≤ k+1` tests the variables of `B_ℓ` in a chain whose 1-edges
/// open fresh subtrees for the next layer; layer `k+2` attaches shared
/// OBDDs for the family under everything tested so far.
pub fn build_dichotomy_fbdd_with_stats(g: &CombinatorFn, k: usize, n: usize) -> Result<(Diagram, DichotomyStats)> {
    let s = match classify_dichotomy(g, k)? {
        Dichotomy::Hard => {
            return Err(Error::Refused(
                "g(X, 1) depends on every argument; no polynomial-size FBDD exists".into(),
            ))
        }
        Dichotomy::Easy(s) => s,
    };
    let n32 = n as u32;
    let mut layers: Vec<Vec<VarId>> = vec![(1..=n32).map(VarId::R).collect()];
    for ell in 1..=k as u32 {
        layers.push(
            (1..=n32)
                .flat_map(|i| (1..=n32).map(move |j| VarId::s(ell, i, j)))
                .collect(),
        );
    }
    layers.push((1..=n32).map(VarId::T).collect());

    let mut b = DiagramBuilder::new(1);
    b.declare(hk_variables(k, n));
    let mut st = Layered {
        g,
        k,
        n,
        s,
        layers: &layers,
        memo: ObddMemo::new(),
        stats: DichotomyStats::default(),
        seen_layers: HashSet::new(),
    };
    let root = st.layer(&mut b, 0, 0, ground_hk_family(k, n)?, 0)?;
    st.stats.layers = st.seen_layers.len();
    Ok((b.finish(root), st.stats))
}

struct Layered<'a> {
    g: &'a CombinatorFn,
    k: usize,
    n: usize,
    s: usize,
    layers: &'a [Vec<VarId>],
    memo: ObddMemo,
    stats: DichotomyStats,
    seen_layers: HashSet<usize>,
}

impl Layered<'_> {
    /// `bbits` bit `ℓ` records `b_ℓ = 1`.
    fn layer(
        &mut self,
        b: &mut DiagramBuilder,
        at: usize,
        pos: usize,
        fam: Vec<MonotoneDnf>,
        bbits: u64,
    ) -> Result<NodeId> {
        self.seen_layers.insert(at);
        if at == self.layers.len() {
            return self.leaf(b, fam, bbits);
        }
        let var = &self.layers[at][pos];
        let lo_fam: Vec<MonotoneDnf> = fam.iter().map(|h| h.restrict_var(var, false)).collect();
        let hi_fam: Vec<MonotoneDnf> = fam.iter().map(|h| h.restrict_var(var, true)).collect();
        let lo = if pos + 1 < self.layers[at].len() {
            self.layer(b, at, pos + 1, lo_fam, bbits)?
        } else {
            self.layer(b, at + 1, 0, lo_fam, bbits)?
        };
        let hi = self.layer(b, at + 1, 0, hi_fam, bbits | 1 << at)?;
        self.stats.tree_nodes += 1;
        Ok(b.decision(var.clone(), lo, hi))
    }

    fn leaf(&mut self, b: &mut DiagramBuilder, mut fam: Vec<MonotoneDnf>, bbits: u64) -> Result<NodeId> {
        self.stats.leaves += 1;
        let k = self.k;
        let all_ones = (1u64 << (k + 2)) - 1;
        if bbits == all_ones {
            // g(X, 1) ignores X_s, so H_ks can be dropped.
            fam[self.s] = MonotoneDnf::bottom();
        }
        let g = self.g;
        let relabel = move |h: u64| u64::from(g.eval((h | bbits << (k + 1)) as usize));
        let mut sink = Emit {
            shared: Some(&mut self.memo),
            tag: bbits,
            relabel: &relabel,
        };
        emit_family(b, &fam, &Assignment::new(), k, self.n, 0, &mut self.stats.family, &mut sink)
    }
}

/// `C · n^{2k+2}` with the frozen constant.
pub fn dichotomy_size_bound(k: usize, n: usize) -> u128 {
    DICHOTOMY_C * (n as u128).pow(2 * k as u32 + 2)
}

pub const DICHOTOMY_C: u128 = 16;
