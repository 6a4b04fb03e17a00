//! From an FBDD for `f(H_k0, ..., H_kk)` to a multi-output FBDD for the
//! family itself.
//!
//! Every node gets the residual family of one representative path: the
//! first path found by a sweep from the root, rather than the
//! lexicographically first assignment. Nodes whose residual keeps at least
//! four independent transversals form `V4`. Inside `V4` the original tests
//! are kept, each edge that creates new `H_k`-units gets a chain of unit
//! tests whose 1-edges exit into a transversal-free family OBDD, and later
//! re-tests of those units become no-ops. Where the diagram leaves `V4` a
//! family OBDD for the residual with its `H_k`-units set to 0 takes over.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{evaluate, remove_noops, validate, Diagram, DiagramBuilder, DiagramClass, Node, NodeId};
use crate::error::{Error, Result};
use crate::formula::{Assignment, MonotoneDnf, VarId};
use crate::lineage::{ground_hk_family, hk_variables, CombinatorFn, CompositeLineage};

use super::family_obdd::{emit_family, Emit, FamilyStats, ObddMemo, DEFAULT_MAX_TRANSVERSALS};
use super::transversal::{family_units, max_matching, transversal_pairs};

const EXHAUSTIVE_CHECK_VARS: usize = 16;
const SAMPLED_CHECKS: usize = 512;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiOutputStats {
    pub input_size: usize,
    pub v4_nodes: usize,
    pub boundary_nodes: usize,
    pub noop_nodes: usize,
    pub chain_nodes: usize,
    pub family: FamilyStats,
}

/// Multi-output FBDD for `(H_k0, ..., H_kk)` at domain `n`, given an FBDD
/// `f` for `comb(H_k0, ..., H_kk)`.
pub fn fbdd_to_multioutput(f: &Diagram, comb: &CombinatorFn, k: usize, n: usize) -> Result<Diagram> {
    fbdd_to_multioutput_with_stats(f, comb, k, n).map(|(d, _)| d)
}

pub fn fbdd_to_multioutput_with_stats(
    f: &Diagram,
    comb: &CombinatorFn,
    k: usize,
    n: usize,
) -> Result<(Diagram, MultiOutputStats)> {
    if comb.arity() != k + 1 {
        return Err(Error::Unsupported(format!(
            "combinator arity {} but the family has {} members",
            comb.arity(),
            k + 1
        )));
    }
    if let Some(l) = (0..=k).find(|&l| comb.depends_on(l).is_none()) {
        return Err(Error::NotFullyDependent(l));
    }
    if f.outputs() != 1 {
        return Err(Error::Unsupported(format!("{} outputs", f.outputs())));
    }
    let report = validate(f);
    if report.class != DiagramClass::Fbdd {
        return Err(Error::InvalidDiagram(format!("expected an FBDD: {}", report.describe())));
    }
    let f = remove_noops(f);
    check_function(&f, comb, k, n)?;

    let size = f.size();
    let mut family: Vec<Option<Vec<MonotoneDnf>>> = vec![None; size];
    let mut via: Vec<Option<(NodeId, bool)>> = vec![None; size];
    family[f.root()] = Some(ground_hk_family(k, n)?);
    for id in (0..size).rev() {
        let Node::Decision { var, lo, hi } = f.node(id) else { continue };
        let Some(fam) = family[id].clone() else { continue };
        for (value, c) in [(false, *lo), (true, *hi)] {
            if family[c].is_none() {
                family[c] = Some(fam.iter().map(|h| h.restrict_var(var, value)).collect());
                via[c] = Some((id, value));
            }
        }
    }
    let theta_of = |mut v: NodeId| -> Assignment {
        let mut theta = Assignment::new();
        while let Some((p, value)) = via[v] {
            if let Node::Decision { var, .. } = f.node(p) {
                theta.bind(var.clone(), value).expect("a path binds each variable once");
            }
            v = p;
        }
        theta
    };

    let in_v4: Vec<bool> = (0..size)
        .map(|id| match (&family[id], f.node(id)) {
            (Some(fam), Node::Decision { .. }) => max_matching(&transversal_pairs(fam, k, n)).len() >= 4,
            _ => false,
        })
        .collect();
    let units: Vec<BTreeSet<VarId>> = (0..size)
        .map(|id| if in_v4[id] { family_units(family[id].as_ref().unwrap()) } else { BTreeSet::new() })
        .collect();
    let new_units = |u: NodeId, v: NodeId| -> Vec<VarId> { units[v].difference(&units[u]).cloned().collect() };

    // Units introduced on some V4 edge above each V4 node.
    let mut consumed: Vec<BTreeSet<VarId>> = vec![BTreeSet::new(); size];
    for id in (0..size).rev() {
        if !in_v4[id] {
            continue;
        }
        if let Node::Decision { lo, hi, .. } = *f.node(id) {
            for c in [lo, hi] {
                if in_v4[c] {
                    let mut add = consumed[id].clone();
                    add.extend(new_units(id, c));
                    consumed[c].extend(add);
                }
            }
        }
    }

    let mut stats = MultiOutputStats {
        input_size: size,
        v4_nodes: in_v4.iter().filter(|&&b| b).count(),
        ..Default::default()
    };
    let mut b = DiagramBuilder::new(k + 1);
    b.declare(hk_variables(k, n));
    let mut memo = ObddMemo::new();
    let mut families: HashMap<Vec<MonotoneDnf>, NodeId> = HashMap::new();
    let mut attach = |b: &mut DiagramBuilder, args: Vec<MonotoneDnf>, theta: &Assignment, stats: &mut MultiOutputStats| {
        if let Some(&id) = families.get(&args) {
            return Ok(id);
        }
        let mut sink = Emit {
            shared: Some(&mut memo),
            tag: 0,
            relabel: &|l| l,
        };
        let id = emit_family(b, &args, theta, k, n, DEFAULT_MAX_TRANSVERSALS, &mut stats.family, &mut sink)?;
        families.insert(args, id);
        Ok::<NodeId, Error>(id)
    };

    if !in_v4[f.root()] {
        let args = family[f.root()].clone().unwrap();
        let root = attach(&mut b, args, &Assignment::new(), &mut stats)?;
        return Ok((b.finish(root), stats));
    }

    let mut target: Vec<NodeId> = vec![usize::MAX; size];
    for id in 0..size {
        if !in_v4[id] {
            continue;
        }
        let Node::Decision { var, lo, hi } = f.node(id).clone() else { unreachable!() };
        let fam = family[id].as_ref().unwrap();
        let noop = consumed[id].contains(&var) && in_v4[lo];
        let boundary = !noop && !(in_v4[lo] && in_v4[hi]);
        if boundary {
            // The construction asks for a representative with precisely 4
            // independent transversals; the sweep's representative is used
            // as found even when it has more.
            stats.boundary_nodes += 1;
            let mut theta = theta_of(id);
            let mut args = fam.clone();
            for z in &units[id] {
                args = args.iter().map(|h| h.restrict_var(z, false)).collect();
                theta.bind(z.clone(), false)?;
            }
            target[id] = attach(&mut b, args, &theta, &mut stats)?;
            continue;
        }
        let mut edge = |b: &mut DiagramBuilder, value: bool, child: NodeId, stats: &mut MultiOutputStats| {
            let zs = new_units(id, child);
            if zs.is_empty() {
                return Ok(target[child]);
            }
            let mut theta = theta_of(id);
            theta.bind(var.clone(), value)?;
            let mut base: Vec<MonotoneDnf> = fam.iter().map(|h| h.restrict_var(&var, value)).collect();
            for z in units[id].iter().filter(|z| **z != var) {
                base = base.iter().map(|h| h.restrict_var(z, false)).collect();
                theta.bind(z.clone(), false)?;
            }
            let mut exits = Vec::with_capacity(zs.len());
            for z in &zs {
                let args = base.iter().map(|h| h.restrict_var(z, true)).collect();
                let exit = attach(b, args, &theta.clone().with(z.clone(), true)?, stats)?;
                exits.push(exit);
                base = base.iter().map(|h| h.restrict_var(z, false)).collect();
                theta.bind(z.clone(), false)?;
            }
            stats.chain_nodes += zs.len();
            let mut cur = target[child];
            for (z, exit) in zs.iter().zip(exits).rev() {
                cur = b.decision(z.clone(), cur, exit);
            }
            Ok::<NodeId, Error>(cur)
        };
        if noop {
            stats.noop_nodes += 1;
            target[id] = edge(&mut b, false, lo, &mut stats)?;
        } else {
            let lo_t = edge(&mut b, false, lo, &mut stats)?;
            let hi_t = edge(&mut b, true, hi, &mut stats)?;
            target[id] = b.decision(var.clone(), lo_t, hi_t);
        }
    }
    Ok((b.finish(target[f.root()]), stats))
}

/// `Ψ` agrees with `f` on every assignment (few variables) or on a seeded
/// sample.
fn check_function(f: &Diagram, comb: &CombinatorFn, k: usize, n: usize) -> Result<()> {
    let psi = CompositeLineage::new(comb.clone(), ground_hk_family(k, n)?)?;
    let vars = hk_variables(k, n);
    let known: BTreeSet<&VarId> = vars.iter().collect();
    if let Some(v) = f.tested_variables().iter().find(|v| !known.contains(v)) {
        return Err(Error::WrongFunction(format!("tests {v}, which is outside the family")));
    }
    let check = |bits: &dyn Fn(usize) -> bool| -> Result<()> {
        let theta = Assignment::from_pairs(vars.iter().enumerate().map(|(i, v)| (v.clone(), bits(i))))?;
        let want = psi.evaluate(&theta)?;
        if evaluate(f, &theta)?.bit(0) != want {
            return Err(Error::WrongFunction(format!("differs from the lineage at {theta}")));
        }
        Ok(())
    };
    if vars.len() <= EXHAUSTIVE_CHECK_VARS {
        for x in 0..1usize << vars.len() {
            check(&|i| x >> i & 1 == 1)?;
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..SAMPLED_CHECKS {
            let p: f64 = rng.gen_range(0.2..0.8);
            let bits: Vec<bool> = (0..vars.len()).map(|_| rng.gen_bool(p)).collect();
            check(&|i| bits[i])?;
        }
    }
    Ok(())
}
