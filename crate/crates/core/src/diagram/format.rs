//! The line-oriented `mdd` diagram format and DOT export.
//!
//! ```text
//! mdd <num_nodes> <num_vars> <num_outputs>
//! S <b_1> .. <b_m>
//! D <var> <lo> <hi>
//! A|O|X|E <l> <r>
//! N <c>
//! P <c>
//! map <var> <name>
//! ```
//!
//! Nodes are numbered by line order starting at 0, children first; the last
//! node is the root. Variables are indices into the declared universe and
//! the `map` trailer names them.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Diagram, Label, Node};
use crate::error::{Error, Result};
use crate::formula::VarId;

pub fn write_mdd(d: &Diagram) -> String {
    let index: HashMap<&VarId, usize> = d
        .universe()
        .iter()
        .enumerate()
        .map(|(i, v)| (v, i))
        .collect();
    let mut out = String::new();
    writeln!(out, "mdd {} {} {}", d.size(), d.universe().len(), d.outputs()).unwrap();
    for node in d.nodes() {
        match node {
            Node::Sink(l) => {
                out.push('S');
                for i in 0..d.outputs() {
                    write!(out, " {}", u8::from(l.bit(i))).unwrap();
                }
                out.push('\n');
            }
            Node::Decision { var, lo, hi } => {
                writeln!(out, "D {} {lo} {hi}", index[var]).unwrap();
            }
            Node::And(l, r) => writeln!(out, "A {l} {r}").unwrap(),
            Node::Or(l, r) => writeln!(out, "O {l} {r}").unwrap(),
            Node::Xor(l, r) => writeln!(out, "X {l} {r}").unwrap(),
            Node::Equiv(l, r) => writeln!(out, "E {l} {r}").unwrap(),
            Node::Not(c) => writeln!(out, "N {c}").unwrap(),
            Node::NoOp(c) => writeln!(out, "P {c}").unwrap(),
        }
    }
    for (i, v) in d.universe().iter().enumerate() {
        writeln!(out, "map {i} {v}").unwrap();
    }
    out
}

pub fn read_mdd(text: &str) -> Result<Diagram> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing `mdd` header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "mdd" {
        return Err(Error::parse(hline, "expected `mdd <nodes> <vars> <outputs>`"));
    }
    let num = |s: &str, line: usize| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| Error::parse(line, format!("expected a number, got `{s}`")))
    };
    let num_nodes = num(h[1], hline)?;
    let num_vars = num(h[2], hline)?;
    let outputs = num(h[3], hline)?;
    if !(1..=64).contains(&outputs) {
        return Err(Error::parse(hline, "between 1 and 64 outputs supported"));
    }

    let mut raw: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut names: Vec<Option<VarId>> = vec![None; num_vars];
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f[0] == "map" {
            if f.len() < 3 {
                return Err(Error::parse(line, "expected `map <id> <name>`"));
            }
            let id = num(f[1], line)?;
            if id >= num_vars {
                return Err(Error::parse(line, format!("variable {id} out of range")));
            }
            let name = f[2..].join(" ");
            names[id] = Some(name.parse::<VarId>().map_err(|e| Error::parse(line, e))?);
        } else {
            raw.push((line, f));
        }
    }
    if raw.len() != num_nodes {
        return Err(Error::parse(
            hline,
            format!("header declares {num_nodes} nodes, found {}", raw.len()),
        ));
    }
    let universe: Vec<VarId> = names
        .into_iter()
        .enumerate()
        .map(|(i, n)| n.unwrap_or_else(|| VarId::sym(&format!("x{i}"))))
        .collect();

    let mut nodes = Vec::with_capacity(num_nodes);
    for (id, (line, f)) in raw.into_iter().enumerate() {
        let arity = |want: usize| -> Result<()> {
            if f.len() != want + 1 {
                return Err(Error::parse(line, format!("`{}` takes {want} fields", f[0])));
            }
            Ok(())
        };
        let child = |s: &str| -> Result<usize> {
            let c = num(s, line)?;
            if c >= id {
                return Err(Error::parse(line, format!("child {c} does not precede node {id}")));
            }
            Ok(c)
        };
        let node = match f[0] {
            "S" => {
                arity(outputs)?;
                let mut bits = Vec::with_capacity(outputs);
                for b in &f[1..] {
                    bits.push(match *b {
                        "0" => false,
                        "1" => true,
                        _ => return Err(Error::parse(line, "sink bits must be 0 or 1")),
                    });
                }
                Node::Sink(Label::from_bits(&bits))
            }
            "D" => {
                arity(3)?;
                let v = num(f[1], line)?;
                if v >= universe.len() {
                    return Err(Error::parse(line, format!("variable {v} out of range")));
                }
                Node::Decision {
                    var: universe[v].clone(),
                    lo: child(f[2])?,
                    hi: child(f[3])?,
                }
            }
            "A" | "O" | "X" | "E" => {
                arity(2)?;
                let (l, r) = (child(f[1])?, child(f[2])?);
                match f[0] {
                    "A" => Node::And(l, r),
                    "O" => Node::Or(l, r),
                    "X" => Node::Xor(l, r),
                    _ => Node::Equiv(l, r),
                }
            }
            "N" | "P" => {
                arity(1)?;
                let c = child(f[1])?;
                if f[0] == "N" {
                    Node::Not(c)
                } else {
                    Node::NoOp(c)
                }
            }
            other => return Err(Error::parse(line, format!("unknown node kind `{other}`"))),
        };
        nodes.push(node);
    }
    Diagram::from_parts(nodes, outputs, universe)
}

/// Graphviz rendering: solid 1-edges, dashed 0-edges.
pub fn to_dot(d: &Diagram) -> String {
    let mut out = String::from("digraph diagram {\n  node [fontname=\"Helvetica\"];\n");
    for (id, node) in d.nodes().iter().enumerate() {
        match node {
            Node::Sink(l) => {
                let bits: String = (0..d.outputs()).map(|i| if l.bit(i) { '1' } else { '0' }).collect();
                writeln!(out, "  n{id} [shape=box, label=\"{bits}\"];").unwrap();
            }
            Node::Decision { var, lo, hi } => {
                writeln!(out, "  n{id} [shape=circle, label=\"{var}\"];").unwrap();
                writeln!(out, "  n{id} -> n{lo} [style=dashed];").unwrap();
                writeln!(out, "  n{id} -> n{hi};").unwrap();
            }
            other => {
                let label = match other {
                    Node::And(..) => "AND",
                    Node::Or(..) => "OR",
                    Node::Xor(..) => "XOR",
                    Node::Equiv(..) => "EQUIV",
                    Node::Not(_) => "NOT",
                    _ => "no-op",
                };
                writeln!(out, "  n{id} [shape=diamond, label=\"{label}\"];").unwrap();
                for c in other.children() {
                    writeln!(out, "  n{id} -> n{c};").unwrap();
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
