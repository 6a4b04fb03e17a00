//! Query lineages: the `H_k` and `B` families, Boolean combinators over
//! them, and composite lineages `f(H_k0, ..., H_kk)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{Assignment, MonotoneDnf, VarId};

/// A Boolean function of `arity` arguments stored as a truth table.
///
/// Bit `x` of the table is `f` at the point whose argument `l` is bit `l`
/// of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CombinatorFn {
    arity: usize,
    table: Vec<u64>,
    clauses: Option<Vec<Vec<usize>>>,
}

pub const MAX_ARITY: usize = 20;

fn words_for(arity: usize) -> usize {
    (1usize << arity).div_ceil(64)
}

impl CombinatorFn {
    pub fn from_fn(arity: usize, f: impl Fn(usize) -> bool) -> Self {
        assert!(arity <= MAX_ARITY, "combinator arity {arity} too large");
        let mut table = vec![0u64; words_for(arity)];
        for x in 0..(1usize << arity) {
            if f(x) {
                table[x / 64] |= 1 << (x % 64);
            }
        }
        CombinatorFn {
            arity,
            table,
            clauses: None,
        }
    }

    pub fn constant(arity: usize, value: bool) -> Self {
        Self::from_fn(arity, |_| value)
    }

    /// `X_0 ∨ ... ∨ X_{m-1}`.
    pub fn or_all(arity: usize) -> Self {
        Self::from_cnf(arity, vec![(0..arity).collect()]).expect("valid clause")
    }

    /// A positive CNF over argument indices; the clause list stays attached.
    pub fn from_cnf(arity: usize, clauses: Vec<Vec<usize>>) -> Result<Self> {
        for c in &clauses {
            if let Some(&bad) = c.iter().find(|&&i| i >= arity) {
                return Err(Error::parse(0, format!("clause index {bad} >= arity {arity}")));
            }
        }
        let masks: Vec<usize> = clauses
            .iter()
            .map(|c| c.iter().fold(0usize, |m, &i| m | (1 << i)))
            .collect();
        let mut f = Self::from_fn(arity, |x| masks.iter().all(|&m| x & m != 0));
        let mut clauses = clauses;
        for c in clauses.iter_mut() {
            c.sort_unstable();
            c.dedup();
        }
        f.clauses = Some(clauses);
        Ok(f)
    }

    /// Parses the hex truth-table form: the last hex digit holds points
    /// 0..3, bit `b` of that digit being point `b`.
    pub fn from_hex(arity: usize, hex: &str) -> Result<Self> {
        let hex: String = hex.chars().filter(|c| !c.is_whitespace()).collect();
        let points = 1usize << arity;
        let digits = points.div_ceil(4);
        if hex.len() != digits {
            return Err(Error::parse(
                0,
                format!("truth table needs {digits} hex digits, got {}", hex.len()),
            ));
        }
        let mut bits = vec![false; points];
        for (pos, ch) in hex.chars().rev().enumerate() {
            let d = ch
                .to_digit(16)
                .ok_or_else(|| Error::parse(0, format!("bad hex digit `{ch}`")))?;
            for b in 0..4 {
                let x = pos * 4 + b;
                if d & (1 << b) != 0 {
                    if x >= points {
                        return Err(Error::parse(0, "truth table has bits beyond 2^arity"));
                    }
                    bits[x] = true;
                }
            }
        }
        Ok(Self::from_fn(arity, |x| bits[x]))
    }

    pub fn to_hex(&self) -> String {
        let points = 1usize << self.arity;
        let digits = points.div_ceil(4);
        (0..digits)
            .rev()
            .map(|pos| {
                let mut d = 0u32;
                for b in 0..4 {
                    let x = pos * 4 + b;
                    if x < points && self.eval(x) {
                        d |= 1 << b;
                    }
                }
                char::from_digit(d, 16).unwrap()
            })
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn clauses(&self) -> Option<&[Vec<usize>]> {
        self.clauses.as_deref()
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x / 64] >> (x % 64) & 1 == 1
    }

    pub fn eval_bits(&self, args: &[bool]) -> bool {
        let x = args
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | (usize::from(b) << i));
        self.eval(x)
    }

    pub fn as_constant(&self) -> Option<bool> {
        let first = self.eval(0);
        (0..(1usize << self.arity))
            .all(|x| self.eval(x) == first)
            .then_some(first)
    }

    /// Returns a witness point (with bit `ell` cleared) on which flipping
    /// argument `ell` changes the value, if one exists.
    pub fn depends_on(&self, ell: usize) -> Option<usize> {
        assert!(ell < self.arity);
        (0..(1usize << self.arity))
            .filter(|x| x & (1 << ell) == 0)
            .find(|&x| self.eval(x) != self.eval(x | (1 << ell)))
    }

    pub fn depends_on_all(&self) -> bool {
        (0..self.arity).all(|l| self.depends_on(l).is_some())
    }

    pub fn is_monotone(&self) -> bool {
        (0..(1usize << self.arity)).all(|x| {
            !self.eval(x) || (0..self.arity).all(|l| self.eval(x | (1 << l)))
        })
    }

    /// Fixes argument `ell` to `value`, returning a function of the
    /// remaining `arity - 1` arguments in their original relative order.
    pub fn fix(&self, ell: usize, value: bool) -> CombinatorFn {
        assert!(ell < self.arity);
        let low = (1usize << ell) - 1;
        let mut out = Self::from_fn(self.arity - 1, |y| {
            let x = (y & low) | ((y & !low) << 1) | (usize::from(value) << ell);
            self.eval(x)
        });
        if let Some(cl) = &self.clauses {
            let shift = |i: usize| if i > ell { i - 1 } else { i };
            let mut kept = Vec::new();
            let mut ok = true;
            for c in cl {
                if c.contains(&ell) {
                    if value {
                        continue;
                    }
                    let rest: Vec<usize> = c.iter().filter(|&&i| i != ell).map(|&i| shift(i)).collect();
                    if rest.is_empty() {
                        ok = false;
                        break;
                    }
                    kept.push(rest);
                } else {
                    kept.push(c.iter().map(|&i| shift(i)).collect());
                }
            }
            out.clauses = ok.then_some(kept);
        }
        out
    }

    /// Reorders or duplicates arguments: the result `h` has arity
    /// `new_arity` and `h(y) = self(x)` with `x_l = y_{map[l]}`.
    pub fn remap(&self, new_arity: usize, map: &[usize]) -> CombinatorFn {
        assert_eq!(map.len(), self.arity);
        Self::from_fn(new_arity, |y| {
            let x = map
                .iter()
                .enumerate()
                .fold(0usize, |acc, (l, &src)| acc | (((y >> src) & 1) << l));
            self.eval(x)
        })
    }

    pub fn negate(&self) -> CombinatorFn {
        Self::from_fn(self.arity, |x| !self.eval(x))
    }

    /// Drops the attached clause view, keeping only the table.
    pub fn table_only(mut self) -> Self {
        self.clauses = None;
        self
    }
}

impl fmt::Display for CombinatorFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.clauses {
            Some(cl) => {
                let parts: Vec<String> = cl
                    .iter()
                    .map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "))
                    .collect();
                write!(f, "cnf: {}", parts.join(" | "))
            }
            None => write!(f, "tt: {}", self.to_hex()),
        }
    }
}

/// `g(X, 1)`: fixes the trailing `k + 2` arguments of a dichotomy
/// combinator (the `b` queries) to 1.
pub fn project_g_at_ones(g: &CombinatorFn, k: usize) -> Result<CombinatorFn> {
    if g.arity() != 2 * k + 3 {
        return Err(Error::Unsupported(format!(
            "dichotomy combinator must have arity 2k+3 = {}, got {}",
            2 * k + 3,
            g.arity()
        )));
    }
    let ones = ((1usize << (k + 2)) - 1) << (k + 1);
    Ok(CombinatorFn::from_fn(k + 1, |x| g.eval(x | ones)))
}

fn check_domain(n: usize) -> Result<u32> {
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    Ok(n as u32)
}

/// The lineages `H_k0, ..., H_kk` over domain `[n]`.
pub fn ground_hk_family(k: usize, n: usize) -> Result<Vec<MonotoneDnf>> {
    let n = check_domain(n)?;
    if k == 0 {
        return Err(Error::Unsupported("the H_k family needs k >= 1; use ground_h0".into()));
    }
    let k = k as u32;
    let mut out = Vec::with_capacity(k as usize + 1);
    for ell in 0..=k {
        let mut terms = Vec::with_capacity((n * n) as usize);
        for i in 1..=n {
            for j in 1..=n {
                terms.push(hk_term(k, ell, i, j));
            }
        }
        out.push(MonotoneDnf::new(terms));
    }
    Ok(out)
}

/// The 2-term of `H_{k,ell}` indexed by `(i, j)`.
pub fn hk_term(k: u32, ell: u32, i: u32, j: u32) -> Vec<VarId> {
    if ell == 0 {
        vec![VarId::R(i), VarId::s(1, i, j)]
    } else if ell == k {
        vec![VarId::s(k, i, j), VarId::T(j)]
    } else {
        vec![VarId::s(ell, i, j), VarId::s(ell + 1, i, j)]
    }
}

/// `H_0 = ⋁ R(i) S(i,j) T(j)`.
pub fn ground_h0(n: usize) -> Result<MonotoneDnf> {
    let n = check_domain(n)?;
    let mut terms = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            terms.push(vec![VarId::R(i), VarId::s(0, i, j), VarId::T(j)]);
        }
    }
    Ok(MonotoneDnf::new(terms))
}

/// The lineages `B_0, ..., B_{k+1}` of the existence queries.
pub fn ground_b_family(k: usize, n: usize) -> Result<Vec<MonotoneDnf>> {
    let n = check_domain(n)?;
    if k == 0 {
        return Err(Error::Unsupported("the B family needs k >= 1".into()));
    }
    let mut out = Vec::with_capacity(k + 2);
    out.push(MonotoneDnf::new((1..=n).map(|i| [VarId::R(i)])));
    for ell in 1..=k as u32 {
        out.push(MonotoneDnf::new(
            (1..=n).flat_map(|i| (1..=n).map(move |j| [VarId::s(ell, i, j)])),
        ));
    }
    out.push(MonotoneDnf::new((1..=n).map(|j| [VarId::T(j)])));
    Ok(out)
}

/// All variables of the `H_k` family at domain `n`, in canonical order.
pub fn hk_variables(k: usize, n: usize) -> Vec<VarId> {
    let n = n as u32;
    let mut vars: Vec<VarId> = (1..=n).map(VarId::R).collect();
    for ell in 1..=k as u32 {
        for i in 1..=n {
            for j in 1..=n {
                vars.push(VarId::s(ell, i, j));
            }
        }
    }
    vars.extend((1..=n).map(VarId::T));
    vars
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Fixed(bool),
    Arg(usize),
}

/// `f(A_0, ..., A_{m-1})` with the constant arguments curried into `f`.
///
/// `slots[l]` records where original argument `l` went; the stored
/// combinator has arity `args.len()`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositeLineage {
    comb: CombinatorFn,
    args: Vec<MonotoneDnf>,
    slots: Vec<Slot>,
}

impl CompositeLineage {
    pub fn new(comb: CombinatorFn, args: Vec<MonotoneDnf>) -> Result<Self> {
        if comb.arity() != args.len() {
            return Err(Error::Unsupported(format!(
                "combinator arity {} but {} arguments",
                comb.arity(),
                args.len()
            )));
        }
        let slots = (0..args.len()).map(Slot::Arg).collect();
        let mut c = CompositeLineage { comb, args, slots };
        c.fold_constants();
        Ok(c)
    }

    /// `f(H_k0, ..., H_kk)` at domain `n`.
    pub fn grounded(comb: CombinatorFn, k: usize, n: usize) -> Result<Self> {
        Self::new(comb, ground_hk_family(k, n)?)
    }

    /// `g(H_k0, ..., H_kk, B_0, ..., B_{k+1})` at domain `n`.
    pub fn grounded_dichotomy(g: CombinatorFn, k: usize, n: usize) -> Result<Self> {
        let mut args = ground_hk_family(k, n)?;
        args.extend(ground_b_family(k, n)?);
        Self::new(g, args)
    }

    pub fn from_dnf(phi: MonotoneDnf) -> Self {
        Self::new(CombinatorFn::from_fn(1, |x| x == 1), vec![phi]).expect("arity 1")
    }

    fn fold_constants(&mut self) {
        // Fold from the highest position so earlier positions stay valid.
        let mut p = self.args.len();
        while p > 0 {
            p -= 1;
            if let Some(b) = self.args[p].as_constant() {
                self.comb = self.comb.fix(p, b);
                self.args.remove(p);
                for s in self.slots.iter_mut() {
                    match *s {
                        Slot::Arg(q) if q == p => *s = Slot::Fixed(b),
                        Slot::Arg(q) if q > p => *s = Slot::Arg(q - 1),
                        _ => {}
                    }
                }
            }
        }
    }

    pub fn combinator(&self) -> &CombinatorFn {
        &self.comb
    }

    pub fn args(&self) -> &[MonotoneDnf] {
        &self.args
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn original_arity(&self) -> usize {
        self.slots.len()
    }

    /// The residual of original argument `l`.
    pub fn argument(&self, l: usize) -> MonotoneDnf {
        match self.slots[l] {
            Slot::Fixed(b) => MonotoneDnf::constant(b),
            Slot::Arg(p) => self.args[p].clone(),
        }
    }

    pub fn as_constant(&self) -> Option<bool> {
        self.comb.as_constant()
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.args.iter().flat_map(|a| a.variables()).collect()
    }

    pub fn evaluate(&self, theta: &Assignment) -> Result<bool> {
        let mut x = 0usize;
        for (p, a) in self.args.iter().enumerate() {
            if a.evaluate(theta)? {
                x |= 1 << p;
            }
        }
        Ok(self.comb.eval(x))
    }

    /// `Ψ[θ]`, restricting argument-wise and currying constants.
    pub fn restrict(&self, theta: &Assignment) -> CompositeLineage {
        let mut out = CompositeLineage {
            comb: self.comb.clone(),
            args: self.args.iter().map(|a| a.restrict(theta)).collect(),
            slots: self.slots.clone(),
        };
        out.fold_constants();
        out
    }
}

impl fmt::Display for CompositeLineage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.comb)?;
        for (p, a) in self.args.iter().enumerate() {
            writeln!(f, "  arg {p}: {a}")?;
        }
        Ok(())
    }
}

/// Restriction of a composite lineage, distributing over its arguments.
pub fn restrict_composite(psi: &CompositeLineage, theta: &Assignment) -> CompositeLineage {
    psi.restrict(theta)
}

/// `f_W = (X0 ∨ X2)(X0 ∨ X3)(X1 ∨ X3)` over four arguments.
pub fn f_w() -> CombinatorFn {
    CombinatorFn::from_cnf(4, vec![vec![0, 2], vec![0, 3], vec![1, 3]]).expect("valid")
}
