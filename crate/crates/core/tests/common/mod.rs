#![allow(dead_code)]

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcount_core::diagram::{evaluate_with, Diagram, DiagramBuilder, Node, NodeId};
use qcount_core::formula::{Assignment, MonotoneDnf, VarId, WeightMap};
use qcount_core::transforms::find_transversals;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym(i: usize) -> VarId {
    VarId::sym(&format!("x{i}"))
}

/// Independent rationals `a/b` with `0 < a < b ≤ 9`.
pub fn random_weights(vars: impl IntoIterator<Item = VarId>, rng: &mut ChaCha8Rng) -> WeightMap {
    let mut w = WeightMap::default();
    for v in vars {
        let b: i64 = rng.gen_range(2..=9);
        let a: i64 = rng.gen_range(1..b);
        w.set(v, BigRational::new(BigInt::from(a), BigInt::from(b))).unwrap();
    }
    w
}

/// A monotone DNF over at most `max_vars` symbols whose terms all have two
/// variables.
pub fn random_2dnf(rng: &mut ChaCha8Rng, max_vars: usize) -> MonotoneDnf {
    let m = rng.gen_range(3..=max_vars);
    let terms = rng.gen_range(2..=2 * m);
    let t: Vec<Vec<VarId>> = (0..terms)
        .map(|_| {
            let a = rng.gen_range(0..m);
            let mut b = rng.gen_range(0..m - 1);
            if b >= a {
                b += 1;
            }
            vec![sym(a), sym(b)]
        })
        .collect();
    MonotoneDnf::new(t)
}

pub fn random_dnf(rng: &mut ChaCha8Rng, max_vars: usize, max_len: usize) -> MonotoneDnf {
    let m = rng.gen_range(2..=max_vars);
    let terms = rng.gen_range(1..=m + 2);
    let pool: Vec<usize> = (0..m).collect();
    let t: Vec<Vec<VarId>> = (0..terms)
        .map(|_| {
            let len = rng.gen_range(1..=max_len.min(m));
            pool.choose_multiple(rng, len).map(|&i| sym(i)).collect()
        })
        .collect();
    MonotoneDnf::new(t)
}

/// A random DLDD over `x0..x{m-1}`: decisions drop their variable from both
/// subtrees and combinators split the remaining variables between children.
pub fn random_dldd(rng: &mut ChaCha8Rng, m: usize) -> Diagram {
    fn gen(b: &mut DiagramBuilder, vars: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> NodeId {
        if vars.is_empty() || depth == 0 {
            return b.constant(rng.gen_bool(0.5));
        }
        let roll = rng.gen_range(0..10);
        if (4..8).contains(&roll) && vars.len() >= 2 {
            let mut shuffled = vars.to_vec();
            shuffled.shuffle(rng);
            let cut = rng.gen_range(1..shuffled.len());
            let l = gen(b, &shuffled[..cut], depth - 1, rng);
            let r = gen(b, &shuffled[cut..], depth - 1, rng);
            let node = match rng.gen_range(0..4) {
                0 => Node::And(l, r),
                1 => Node::Or(l, r),
                2 => Node::Xor(l, r),
                _ => Node::Equiv(l, r),
            };
            return b.push(node);
        }
        if roll == 8 {
            let c = gen(b, vars, depth - 1, rng);
            return b.push(Node::Not(c));
        }
        let pick = rng.gen_range(0..vars.len());
        let rest: Vec<usize> = vars.iter().copied().filter(|&v| v != vars[pick]).collect();
        let lo = gen(b, &rest, depth - 1, rng);
        let hi = gen(b, &rest, depth - 1, rng);
        b.decision(sym(vars[pick]), lo, hi)
    }
    let mut b = DiagramBuilder::new(1);
    b.declare((0..m).map(sym));
    let vars: Vec<usize> = (0..m).collect();
    let root = gen(&mut b, &vars, 7, rng);
    b.finish(root)
}

/// Output bit 0 of `d` under the assignment encoded by `mask`.
pub fn eval_mask(d: &Diagram, index: &HashMap<VarId, usize>, mask: u64) -> bool {
    evaluate_with(d, |v| index.get(v).map(|&i| mask >> i & 1 == 1))
        .expect("total assignment")
        .bit(0)
}

/// Binds variables until the restricted family has at most `max_t`
/// independent transversals, after a few random bindings of either value.
pub fn random_theta(rng: &mut ChaCha8Rng, k: usize, n: usize, max_t: usize) -> Assignment {
    let n32 = n as u32;
    let mut theta = Assignment::new();
    for _ in 0..rng.gen_range(0..=n) {
        let v = match rng.gen_range(0..3) {
            0 => VarId::R(rng.gen_range(1..=n32)),
            1 => VarId::T(rng.gen_range(1..=n32)),
            _ => VarId::s(rng.gen_range(1..=k as u32), rng.gen_range(1..=n32), rng.gen_range(1..=n32)),
        };
        if !theta.contains(&v) {
            theta.bind(v, rng.gen_bool(0.5)).unwrap();
        }
    }
    loop {
        let t = find_transversals(&theta, k, n);
        if t.max_independent <= max_t {
            return theta;
        }
        let pairs: Vec<(u32, u32)> = t.pairs.iter().copied().collect();
        let (i, j) = *pairs.choose(rng).unwrap();
        let candidates = [
            VarId::R(i),
            VarId::T(j),
            VarId::s(rng.gen_range(1..=k as u32), i, j),
        ];
        let free: Vec<&VarId> = candidates.iter().filter(|v| !theta.contains(v)).collect();
        let v = (*free.choose(rng).expect("a transversal has a free variable")).clone();
        theta.bind(v, false).unwrap();
    }
}
