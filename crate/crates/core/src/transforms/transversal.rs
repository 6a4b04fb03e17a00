//! Transversals of restricted `H_k` families and `H_k`-units.

use std::collections::BTreeSet;

use crate::formula::{Assignment, MonotoneDnf, VarId};
use crate::lineage::{ground_hk_family, hk_term, hk_variables};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransversalSet {
    /// 1-based `(i, j)` pairs.
    pub pairs: BTreeSet<(u32, u32)>,
    /// Largest subset with pairwise distinct rows and columns.
    pub max_independent: usize,
}

impl TransversalSet {
    pub fn from_pairs(pairs: BTreeSet<(u32, u32)>) -> Self {
        let max_independent = max_matching(&pairs).len();
        TransversalSet {
            pairs,
            max_independent,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The independence number by trying every subset of rows. Intended for
    /// cross-checking at small domains.
    pub fn max_independent_exhaustive(&self) -> usize {
        let rows: Vec<u32> = self.pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
        fn go(rows: &[u32], pairs: &BTreeSet<(u32, u32)>, used: &mut BTreeSet<u32>) -> usize {
            let Some((&r, rest)) = rows.split_first() else { return 0 };
            let mut best = go(rest, pairs, used);
            for &(_, c) in pairs.range((r, 0)..=(r, u32::MAX)) {
                if used.insert(c) {
                    best = best.max(1 + go(rest, pairs, used));
                    used.remove(&c);
                }
            }
            best
        }
        go(&rows, &self.pairs, &mut BTreeSet::new())
    }
}

/// The restricted family `H_k0[θ], ..., H_kk[θ]`.
pub fn restricted_family(theta: &Assignment, k: usize, n: usize) -> Vec<MonotoneDnf> {
    ground_hk_family(k, n)
        .expect("k >= 1 and n >= 1")
        .iter()
        .map(|h| h.restrict(theta))
        .collect()
}

/// Pairs whose 2-term is a prime implicant of every argument.
pub(crate) fn transversal_pairs(args: &[MonotoneDnf], k: usize, n: usize) -> BTreeSet<(u32, u32)> {
    let k32 = k as u32;
    let mut out = BTreeSet::new();
    for i in 1..=n as u32 {
        for j in 1..=n as u32 {
            if (0..=k32).all(|l| args[l as usize].contains_term(&hk_term(k32, l, i, j))) {
                out.insert((i, j));
            }
        }
    }
    out
}

pub fn find_transversals(theta: &Assignment, k: usize, n: usize) -> TransversalSet {
    let args = restricted_family(theta, k, n);
    TransversalSet::from_pairs(transversal_pairs(&args, k, n))
}

/// Maximum matching by augmenting paths; returns the matched pairs.
pub(crate) fn max_matching(pairs: &BTreeSet<(u32, u32)>) -> Vec<(u32, u32)> {
    let rows: Vec<u32> = pairs.iter().map(|p| p.0).collect::<BTreeSet<_>>().into_iter().collect();
    let mut owner: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    fn augment(
        r: u32,
        pairs: &BTreeSet<(u32, u32)>,
        seen: &mut BTreeSet<u32>,
        owner: &mut std::collections::HashMap<u32, u32>,
    ) -> bool {
        for &(_, c) in pairs.range((r, 0)..=(r, u32::MAX)) {
            if seen.insert(c) {
                let free = match owner.get(&c) {
                    None => true,
                    Some(&r2) => augment(r2, pairs, seen, owner),
                };
                if free {
                    owner.insert(c, r);
                    return true;
                }
            }
        }
        false
    }
    for &r in &rows {
        augment(r, pairs, &mut BTreeSet::new(), &mut owner);
    }
    let mut m: Vec<(u32, u32)> = owner.into_iter().map(|(c, r)| (r, c)).collect();
    m.sort();
    m
}

/// A minimum vertex cover `(rows, cols)` of the bipartite graph of `pairs`,
/// read off a maximum matching.
pub(crate) fn min_vertex_cover(pairs: &BTreeSet<(u32, u32)>) -> (Vec<u32>, Vec<u32>) {
    let matching = max_matching(pairs);
    let row_mate: std::collections::HashMap<u32, u32> = matching.iter().copied().collect();
    let col_mate: std::collections::HashMap<u32, u32> = matching.iter().map(|&(r, c)| (c, r)).collect();
    let rows: BTreeSet<u32> = pairs.iter().map(|p| p.0).collect();
    // Alternating reachability from unmatched rows.
    let mut z_rows: BTreeSet<u32> = rows.iter().copied().filter(|r| !row_mate.contains_key(r)).collect();
    let mut z_cols: BTreeSet<u32> = BTreeSet::new();
    let mut stack: Vec<u32> = z_rows.iter().copied().collect();
    while let Some(r) = stack.pop() {
        for &(_, c) in pairs.range((r, 0)..=(r, u32::MAX)) {
            if row_mate.get(&r) == Some(&c) || !z_cols.insert(c) {
                continue;
            }
            if let Some(&r2) = col_mate.get(&c) {
                if z_rows.insert(r2) {
                    stack.push(r2);
                }
            }
        }
    }
    let cover_rows = rows.difference(&z_rows).copied().collect();
    (cover_rows, z_cols.into_iter().collect())
}

/// Union of the units of the arguments.
pub(crate) fn family_units(args: &[MonotoneDnf]) -> BTreeSet<VarId> {
    args.iter().flat_map(|a| a.units_or_empty()).collect()
}

/// `U_k(Ψ[θ])`. With at least four independent transversals this is the
/// union of the units of the `H_kℓ[θ]`; otherwise each candidate `Z` is
/// tested directly, using `θ ∪ {Z=1}` as the transversal-free witness.
pub fn hk_units(theta: &Assignment, k: usize, n: usize) -> BTreeSet<VarId> {
    let args = restricted_family(theta, k, n);
    let pairs = transversal_pairs(&args, k, n);
    let t = TransversalSet::from_pairs(pairs);
    if t.max_independent >= 4 {
        return family_units(&args);
    }
    hk_units_by_definition(theta, k, n)
}

/// `U_k` straight from the definition, for cross-checking.
pub fn hk_units_by_definition(theta: &Assignment, k: usize, n: usize) -> BTreeSet<VarId> {
    let args = restricted_family(theta, k, n);
    if transversal_pairs(&args, k, n).is_empty() {
        return BTreeSet::new();
    }
    hk_variables(k, n)
        .into_iter()
        .filter(|z| !theta.contains(z))
        .filter(|z| {
            let a: Vec<MonotoneDnf> = args.iter().map(|h| h.restrict_var(z, true)).collect();
            transversal_pairs(&a, k, n).is_empty()
        })
        .collect()
}
