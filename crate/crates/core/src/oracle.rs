//! Exhaustive weighted model counting, the reference every other
//! probability computation is checked against.

use std::collections::{BTreeSet, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formula::{MonotoneDnf, VarId};
use crate::lineage::{CombinatorFn, CompositeLineage};
use crate::formula::WeightMap;

pub const DEFAULT_CAP: usize = 24;

/// Anything the oracle can enumerate: a combinator over positive DNFs.
pub trait Enumerable {
    fn variables(&self) -> BTreeSet<VarId>;
    fn parts(&self) -> (CombinatorFn, Vec<&MonotoneDnf>);
}

impl Enumerable for MonotoneDnf {
    fn variables(&self) -> BTreeSet<VarId> {
        MonotoneDnf::variables(self)
    }

    fn parts(&self) -> (CombinatorFn, Vec<&MonotoneDnf>) {
        (CombinatorFn::from_fn(1, |x| x == 1), vec![self])
    }
}

impl Enumerable for CompositeLineage {
    fn variables(&self) -> BTreeSet<VarId> {
        CompositeLineage::variables(self)
    }

    fn parts(&self) -> (CombinatorFn, Vec<&MonotoneDnf>) {
        (self.combinator().clone(), self.args().iter().collect())
    }
}

struct MaskForm {
    comb: CombinatorFn,
    args: Vec<Vec<u64>>,
}

impl MaskForm {
    fn new<L: Enumerable + ?Sized>(phi: &L, order: &[VarId]) -> Self {
        let index: HashMap<&VarId, usize> = order.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let (comb, args) = phi.parts();
        let args = args
            .into_iter()
            .map(|a| {
                a.terms()
                    .iter()
                    .map(|t| t.iter().fold(0u64, |m, v| m | (1 << index[v])))
                    .collect()
            })
            .collect();
        MaskForm { comb, args }
    }

    fn eval(&self, x: u64) -> bool {
        let mut point = 0usize;
        for (p, terms) in self.args.iter().enumerate() {
            if terms.iter().any(|&m| x & m == m) {
                point |= 1 << p;
            }
        }
        self.comb.eval(point)
    }
}

fn check_cap(vars: usize, cap: usize) -> Result<()> {
    if vars > cap || vars > 63 {
        return Err(Error::TooLarge { vars, cap });
    }
    Ok(())
}

/// `Pr[φ]` by summing the weight of every satisfying total assignment.
pub fn brute_force_wmc<L: Enumerable + ?Sized>(phi: &L, w: &WeightMap) -> Result<BigRational> {
    brute_force_wmc_capped(phi, w, DEFAULT_CAP)
}

pub fn brute_force_wmc_capped<L: Enumerable + ?Sized>(
    phi: &L,
    w: &WeightMap,
    cap: usize,
) -> Result<BigRational> {
    let order: Vec<VarId> = phi.variables().into_iter().collect();
    check_cap(order.len(), cap)?;
    let form = MaskForm::new(phi, &order);
    // Each p = a/b; sum integer products of a or (b - a) over satisfying
    // assignments and divide by the product of denominators once.
    let ab: Vec<(BigInt, BigInt)> = order
        .iter()
        .map(|v| {
            let p = w.get(v);
            (p.numer().clone(), p.denom().clone())
        })
        .collect();
    fn rec(form: &MaskForm, ab: &[(BigInt, BigInt)], depth: usize, mask: u64) -> BigInt {
        if depth == ab.len() {
            return if form.eval(mask) { BigInt::one() } else { BigInt::zero() };
        }
        let (a, b) = &ab[depth];
        let mut total = BigInt::zero();
        if !a.is_zero() {
            total += a * rec(form, ab, depth + 1, mask | (1 << depth));
        }
        let rest = b - a;
        if !rest.is_zero() {
            total += rest * rec(form, ab, depth + 1, mask);
        }
        total
    }
    let numer = rec(&form, &ab, 0, 0);
    let denom = ab.iter().fold(BigInt::one(), |acc, (_, b)| acc * b);
    Ok(BigRational::new(numer, denom))
}

/// The number of satisfying assignments over the formula's own variables.
pub fn model_count<L: Enumerable + ?Sized>(phi: &L, cap: usize) -> Result<BigUint> {
    let order: Vec<VarId> = phi.variables().into_iter().collect();
    check_cap(order.len(), cap)?;
    let form = MaskForm::new(phi, &order);
    let count = (0..(1u64 << order.len())).filter(|&x| form.eval(x)).count();
    Ok(BigUint::from(count))
}
