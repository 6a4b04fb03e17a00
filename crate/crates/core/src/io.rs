//! Text formats for formulas, weights and query specs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::formula::{Assignment, MonotoneDnf, VarId, WeightMap};
use crate::lineage::{CombinatorFn, CompositeLineage};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// One term per line, variables separated by whitespace; `TRUE` and
/// `FALSE` lines are constants. An empty file is `FALSE`.
pub fn parse_formula(text: &str) -> Result<MonotoneDnf> {
    let mut terms: Vec<Vec<VarId>> = Vec::new();
    for (line, l) in content_lines(text) {
        match l {
            "TRUE" => terms.push(Vec::new()),
            "FALSE" => {}
            _ => {
                let term = l
                    .split_whitespace()
                    .map(|v| v.parse::<VarId>().map_err(|e| Error::parse(line, e)))
                    .collect::<Result<Vec<_>>>()?;
                terms.push(term);
            }
        }
    }
    Ok(MonotoneDnf::new(terms))
}

pub fn write_formula(phi: &MonotoneDnf) -> String {
    if phi.is_top() {
        return "TRUE\n".into();
    }
    if phi.is_bottom() {
        return "FALSE\n".into();
    }
    let mut out = String::new();
    for t in phi.terms() {
        let names: Vec<String> = t.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", names.join(" ")).unwrap();
    }
    out
}

/// `a/b`, an integer, or a decimal such as `0.125`, converted exactly.
pub fn parse_probability(s: &str) -> std::result::Result<BigRational, String> {
    let s = s.trim();
    let bad = || format!("bad probability `{s}`");
    let p = if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        BigRational::new(a, b)
    } else if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: BigInt = if whole.is_empty() { BigInt::zero() } else { whole.parse().map_err(|_| bad())? };
        let frac_num: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        BigRational::new(whole * &scale + frac_num, scale)
    } else {
        BigRational::from_integer(s.parse().map_err(|_| bad())?)
    };
    if p < BigRational::zero() || p > BigRational::one() {
        return Err(format!("probability {s} outside [0, 1]"));
    }
    Ok(p)
}

/// `var p` per line, with an optional leading `default p`.
pub fn parse_weights(text: &str) -> Result<WeightMap> {
    let mut w = WeightMap::default();
    let mut first = true;
    for (line, l) in content_lines(text) {
        let parts: Vec<&str> = l.split_whitespace().collect();
        let [name, p] = parts.as_slice() else {
            return Err(Error::parse(line, "expected `name probability`"));
        };
        let p = parse_probability(p).map_err(|e| Error::parse(line, e))?;
        if *name == "default" {
            if !first {
                return Err(Error::parse(line, "`default` must come first"));
            }
            w = WeightMap::uniform(p)?;
        } else {
            let v: VarId = name.parse().map_err(|e| Error::parse(line, e))?;
            w.set(v, p)?;
        }
        first = false;
    }
    Ok(w)
}

/// A combinator over `H_k0, ..., H_kk`, or over those followed by
/// `B_0, ..., B_{k+1}` when `dichotomy` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuerySpec {
    pub k: usize,
    pub n: Option<usize>,
    pub comb: CombinatorFn,
    pub dichotomy: bool,
}

impl QuerySpec {
    pub fn arity(&self) -> usize {
        self.comb.arity()
    }
}

/// Lines `k=3`, `n=8`, `arity=9` and one of `cnf: 0 2 | 0 3` or `tt: <hex>`.
/// The arity defaults to `k+1`; `2k+3` marks a dichotomy combinator.
pub fn parse_query_spec(text: &str) -> Result<QuerySpec> {
    let mut k: Option<usize> = None;
    let mut n: Option<usize> = None;
    let mut arity: Option<usize> = None;
    let mut body: Option<(usize, bool, String)> = None;
    for (line, l) in content_lines(text) {
        let number = |v: &str| v.trim().parse::<usize>().map_err(|_| Error::parse(line, format!("bad number `{}`", v.trim())));
        if let Some((key, v)) = l.split_once('=') {
            match key.trim() {
                "k" => k = Some(number(v)?),
                "n" => n = Some(number(v)?),
                "arity" => arity = Some(number(v)?),
                other => return Err(Error::parse(line, format!("unknown key `{other}`"))),
            }
        } else if let Some((key, v)) = l.split_once(':') {
            let is_cnf = match key.trim() {
                "cnf" => true,
                "tt" => false,
                other => return Err(Error::parse(line, format!("unknown section `{other}`"))),
            };
            if body.is_some() {
                return Err(Error::parse(line, "more than one combinator given"));
            }
            body = Some((line, is_cnf, v.trim().to_string()));
        } else {
            return Err(Error::parse(line, format!("cannot read `{l}`")));
        }
    }
    let k = k.ok_or_else(|| Error::parse(0, "missing `k=`"))?;
    let arity = arity.unwrap_or(k + 1);
    let dichotomy = match arity {
        a if a == k + 1 => false,
        a if a == 2 * k + 3 => true,
        a => {
            return Err(Error::parse(
                0,
                format!("arity {a} is neither k+1 = {} nor 2k+3 = {}", k + 1, 2 * k + 3),
            ))
        }
    };
    let (line, is_cnf, v) = body.ok_or_else(|| Error::parse(0, "missing `cnf:` or `tt:`"))?;
    let comb = if is_cnf {
        let clauses = v
            .split('|')
            .map(|c| {
                c.split_whitespace()
                    .map(|i| match i.parse::<usize>() {
                        Ok(i) if i < arity => Ok(i),
                        _ => Err(Error::parse(line, format!("bad argument index `{i}`"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CombinatorFn::from_cnf(arity, clauses)?
    } else {
        CombinatorFn::from_hex(arity, &v).map_err(|e| match e {
            Error::Parse { msg, .. } => Error::parse(line, msg),
            e => e,
        })?
    };
    Ok(QuerySpec { k, n, comb, dichotomy })
}

/// A composite lineage: a `comb <arity> <hex>` line, then one `arg`
/// line per argument followed by its terms. A file without a `comb` line
/// is a plain formula.
pub fn parse_lineage(text: &str) -> Result<CompositeLineage> {
    let mut lines = content_lines(text).peekable();
    let Some(&(line, first)) = lines.peek() else {
        return Ok(CompositeLineage::from_dnf(MonotoneDnf::bottom()));
    };
    let Some(rest) = first.strip_prefix("comb ") else {
        return Ok(CompositeLineage::from_dnf(parse_formula(text)?));
    };
    lines.next();
    let parts: Vec<&str> = rest.split_whitespace().collect();
    let [arity, hex] = parts.as_slice() else {
        return Err(Error::parse(line, "expected `comb <arity> <hex>`"));
    };
    let arity: usize = arity.parse().map_err(|_| Error::parse(line, format!("bad arity `{arity}`")))?;
    let comb = CombinatorFn::from_hex(arity, hex).map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(line, msg),
        e => e,
    })?;
    let mut args: Vec<String> = Vec::new();
    for (line, l) in lines {
        if l == "arg" {
            args.push(String::new());
        } else if let Some(cur) = args.last_mut() {
            cur.push_str(l);
            cur.push('\n');
        } else {
            return Err(Error::parse(line, "terms before the first `arg`"));
        }
    }
    let args = args.iter().map(|a| parse_formula(a)).collect::<Result<Vec<_>>>()?;
    CompositeLineage::new(comb, args)
}

pub fn write_lineage(psi: &CompositeLineage) -> String {
    let mut out = format!("comb {} {}\n", psi.combinator().arity(), psi.combinator().to_hex());
    for a in psi.args() {
        out.push_str("arg\n");
        if !a.is_bottom() {
            out.push_str(&write_formula(a));
        }
    }
    out
}

/// `R(1)=1, S1(1,2)=0`, separated by commas or whitespace.
pub fn parse_assignment(s: &str) -> Result<Assignment> {
    let mut theta = Assignment::new();
    let mut depth = 0i32;
    let parts = s.split(|c: char| {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        depth == 0 && (c == ',' || c.is_whitespace())
    });
    for part in parts.filter(|p| !p.is_empty()) {
        let (v, b) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(0, format!("expected `var=0|1`, got `{part}`")))?;
        let b = match b {
            "0" => false,
            "1" => true,
            _ => return Err(Error::parse(0, format!("bad value in `{part}`"))),
        };
        theta.bind(v.parse().map_err(|e| Error::parse(0, e))?, b)?;
    }
    Ok(theta)
}

/// `p` rounded down to `places` decimal digits.
pub fn to_decimal(p: &BigRational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = (p * BigRational::from_integer(scale.clone())).floor().to_integer();
    let (whole, frac) = (&scaled / &scale, &scaled % &scale);
    if places == 0 {
        return whole.to_string();
    }
    format!("{whole}.{:0>places$}", frac.to_string())
}
