//! Shared OBDDs for restricted `H_k` families.
//!
//! Without transversals no co-occurrence component links an `R` variable to
//! a `T` variable. Components holding an `R` are read row by row, those
//! holding a `T` column by column with `T(j)` ahead of its column, and
//! components with neither go with the rows. Remaining transversals are
//! first removed by branching on a minimum vertex cover of their bipartite
//! graph, one `R(i)` per cover row and one `T(j)` per cover column.

use std::collections::{BTreeSet, HashMap};

use crate::diagram::{Diagram, DiagramBuilder, Label, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Assignment, MonotoneDnf, UnionFind, VarId};

use super::transversal::{max_matching, min_vertex_cover, restricted_family, transversal_pairs};

pub const DEFAULT_MAX_TRANSVERSALS: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FamilyStats {
    /// Independent transversals before branching.
    pub t: usize,
    /// Depth of the branching tree.
    pub branch_depth: usize,
    pub leaves: usize,
    /// Most decision nodes testing one variable inside a single leaf OBDD.
    pub max_width: usize,
}

#[derive(Clone, Debug)]
pub struct FamilyObdd {
    pub diagram: Diagram,
    pub stats: FamilyStats,
}

/// A multi-output FBDD whose output `ℓ` is `H_kℓ[θ]` for `ℓ ∈ subset` and
/// constant 0 otherwise.
pub fn build_family_obdd(theta: &Assignment, subset: &BTreeSet<usize>, k: usize, n: usize) -> Result<Diagram> {
    build_family_obdd_with(theta, subset, k, n, DEFAULT_MAX_TRANSVERSALS).map(|f| f.diagram)
}

pub fn build_family_obdd_with(
    theta: &Assignment,
    subset: &BTreeSet<usize>,
    k: usize,
    n: usize,
    max_t: usize,
) -> Result<FamilyObdd> {
    if let Some(&bad) = subset.iter().find(|&&l| l > k) {
        return Err(Error::Unsupported(format!("index {bad} outside 0..={k}")));
    }
    let args = subset_args(theta, subset, k, n);
    let mut b = DiagramBuilder::new(k + 1);
    let mut stats = FamilyStats::default();
    let mut sink = Emit {
        shared: None,
        tag: 0,
        relabel: &|l| l,
    };
    let root = emit_family(&mut b, &args, theta, k, n, max_t, &mut stats, &mut sink)?;
    Ok(FamilyObdd {
        diagram: b.finish(root),
        stats,
    })
}

pub(crate) fn subset_args(theta: &Assignment, subset: &BTreeSet<usize>, k: usize, n: usize) -> Vec<MonotoneDnf> {
    restricted_family(theta, k, n)
        .into_iter()
        .enumerate()
        .map(|(l, h)| if subset.contains(&l) { h } else { MonotoneDnf::bottom() })
        .collect()
}

pub(crate) type ObddMemo = HashMap<(Vec<MonotoneDnf>, u64), NodeId>;

/// Where leaf OBDDs go: a table shared across leaves (or a fresh one per
/// leaf when `shared` is `None`), a tag separating entries that label their
/// sinks differently, and the map from family output bits to sink labels.
pub(crate) struct Emit<'a> {
    pub shared: Option<&'a mut ObddMemo>,
    pub tag: u64,
    pub relabel: &'a dyn Fn(u64) -> u64,
}

/// Emits the branching tree and leaf OBDDs for `args`, the family already
/// restricted by `theta`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn emit_family(
    b: &mut DiagramBuilder,
    args: &[MonotoneDnf],
    theta: &Assignment,
    k: usize,
    n: usize,
    max_t: usize,
    stats: &mut FamilyStats,
    sink: &mut Emit<'_>,
) -> Result<NodeId> {
    let pairs = transversal_pairs(args, k, n);
    let t = max_matching(&pairs).len();
    stats.t = stats.t.max(t);
    if t > max_t {
        return Err(Error::NotTransversalFree(format!(
            "{t} independent transversals under {theta}, cap is {max_t}"
        )));
    }
    let (rows, cols) = min_vertex_cover(&pairs);
    let cover: Vec<VarId> = rows.into_iter().map(VarId::R).chain(cols.into_iter().map(VarId::T)).collect();
    stats.branch_depth = stats.branch_depth.max(cover.len());
    branch(b, args.to_vec(), &cover, k, n, stats, sink)
}

fn branch(
    b: &mut DiagramBuilder,
    args: Vec<MonotoneDnf>,
    cover: &[VarId],
    k: usize,
    n: usize,
    stats: &mut FamilyStats,
    sink: &mut Emit<'_>,
) -> Result<NodeId> {
    let Some((z, rest)) = cover.split_first() else {
        debug_assert!(transversal_pairs(&args, k, n).is_empty());
        stats.leaves += 1;
        let mut widths: HashMap<VarId, usize> = HashMap::new();
        let order = leaf_order(&args)?;
        let mut local = ObddMemo::new();
        let table = match sink.shared.as_deref_mut() {
            Some(m) => m,
            None => &mut local,
        };
        let root = obdd(b, args, &order, table, sink.tag, &mut widths, sink.relabel);
        stats.max_width = stats.max_width.max(widths.values().copied().max().unwrap_or(0));
        return Ok(root);
    };
    let lo_args = args.iter().map(|a| a.restrict_var(z, false)).collect();
    let hi_args = args.iter().map(|a| a.restrict_var(z, true)).collect();
    let lo = branch(b, lo_args, rest, k, n, stats, sink)?;
    let hi = branch(b, hi_args, rest, k, n, stats, sink)?;
    Ok(b.decision(z.clone(), lo, hi))
}

/// Rank of every mentioned variable in the reading order.
fn leaf_order(args: &[MonotoneDnf]) -> Result<HashMap<VarId, usize>> {
    let vars: Vec<VarId> = args
        .iter()
        .flat_map(|a| a.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&VarId, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut uf = UnionFind::new(vars.len());
    for a in args {
        for t in a.terms() {
            for w in t.windows(2) {
                uf.union(index[&w[0]], index[&w[1]]);
            }
        }
    }
    let mut has_r = vec![false; vars.len()];
    let mut has_t = vec![false; vars.len()];
    for (i, v) in vars.iter().enumerate() {
        let root = uf.find(i);
        match v {
            VarId::R(_) => has_r[root] = true,
            VarId::T(_) => has_t[root] = true,
            _ => {}
        }
    }
    let mut keyed: Vec<((u8, u32, u32, u32), &VarId)> = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let root = uf.find(i);
        if has_r[root] && has_t[root] {
            return Err(Error::NotTransversalFree(format!("{v} links an R to a T")));
        }
        let key = match (v, has_t[root]) {
            (VarId::R(i), _) => (0, *i, 0, 0),
            (VarId::T(j), _) => (1, *j, 0, 0),
            (VarId::S { rel, row, col }, false) => (0, *row, *col, *rel),
            (VarId::S { rel, row, col }, true) => (1, *col, *row, *rel),
            (VarId::Sym(_), _) => (2, 0, 0, 0),
        };
        keyed.push((key, v));
    }
    keyed.sort();
    Ok(keyed.into_iter().enumerate().map(|(r, (_, v))| (v.clone(), r)).collect())
}

fn obdd(
    b: &mut DiagramBuilder,
    args: Vec<MonotoneDnf>,
    order: &HashMap<VarId, usize>,
    memo: &mut ObddMemo,
    tag: u64,
    widths: &mut HashMap<VarId, usize>,
    relabel: &dyn Fn(u64) -> u64,
) -> NodeId {
    let key = (args, tag);
    if let Some(&id) = memo.get(&key) {
        return id;
    }
    let args = key.0;
    let next = args
        .iter()
        .flat_map(|a| a.terms().iter().flatten())
        .min_by_key(|v| order[*v])
        .cloned();
    let id = match next {
        None => {
            let bits = args
                .iter()
                .enumerate()
                .fold(0u64, |acc, (l, a)| acc | (u64::from(a.is_top()) << l));
            b.sink(Label(relabel(bits)))
        }
        Some(z) => {
            let lo_args = args.iter().map(|a| a.restrict_var(&z, false)).collect();
            let hi_args = args.iter().map(|a| a.restrict_var(&z, true)).collect();
            let lo = obdd(b, lo_args, order, memo, tag, widths, relabel);
            let hi = obdd(b, hi_args, order, memo, tag, widths, relabel);
            *widths.entry(z.clone()).or_default() += 1;
            b.decision(z, lo, hi)
        }
    };
    memo.insert((args, tag), id);
    id
}

/// `64 · k · 2^{k+t} · n²`.
pub fn family_size_bound(k: usize, t: usize, n: usize) -> u128 {
    64 * (k as u128) * (1u128 << (k + t)) * (n as u128).pow(2)
}
