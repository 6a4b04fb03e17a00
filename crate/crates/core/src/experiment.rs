//! Grounded versus lifted runs over a range of domain sizes.

use std::fmt;
use std::time::Instant;

use crate::compiler::{compile, CompileConfig};
use crate::diagram::wmc;
use crate::error::{Error, Result};
use crate::formula::WeightMap;
use crate::io::QuerySpec;
use crate::lifted::{is_safe, lifted_wmc_detailed};
use crate::lineage::CompositeLineage;
use crate::oracle::brute_force_wmc_capped;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Mode {
    Grounded,
    Lifted,
    Oracle,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Grounded => "grounded",
            Mode::Lifted => "lifted",
            Mode::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentRow {
    pub query_id: String,
    pub k: usize,
    pub n: usize,
    pub mode: Mode,
    /// Diagram nodes for grounded runs (created so far when the budget ran
    /// out), total OBDD nodes for lifted runs, assignments for the oracle.
    pub nodes: u64,
    pub cache_hits: u64,
    /// `None` iff the run did not complete.
    pub probability: Option<String>,
    pub elapsed_ms: u128,
    pub heuristic: String,
    pub budget_hit: bool,
}

pub const CSV_HEADER: &str = "query_id,k,n,mode,nodes,cache_hits,probability,elapsed_ms,heuristic,budget_hit";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl ExperimentRow {
    pub fn to_csv(&self) -> String {
        [
            csv_field(&self.query_id),
            self.k.to_string(),
            self.n.to_string(),
            self.mode.to_string(),
            self.nodes.to_string(),
            self.cache_hits.to_string(),
            self.probability.clone().unwrap_or_default(),
            self.elapsed_ms.to_string(),
            csv_field(&self.heuristic),
            self.budget_hit.to_string(),
        ]
        .join(",")
    }
}

pub fn to_csv(rows: &[ExperimentRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub compile: CompileConfig,
    pub weights: WeightMap,
    /// The oracle runs only up to this many variables.
    pub oracle_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            compile: CompileConfig::default(),
            weights: WeightMap::default(),
            oracle_cap: 20,
        }
    }
}

/// For each `n`: a grounded compile, a lifted evaluation when the query is
/// safe, and the oracle when the lineage is small enough. Completed
/// probabilities must agree exactly.
pub fn run_separation(
    query_id: &str,
    spec: &QuerySpec,
    ns: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Vec<ExperimentRow>> {
    let lifted = !spec.dichotomy && is_safe(&spec.comb)?;
    let heuristic = cfg.compile.heuristic.to_string();
    let mut rows = Vec::new();
    for &n in ns {
        let row = |mode, nodes, cache_hits, probability, elapsed_ms, budget_hit| ExperimentRow {
            query_id: query_id.to_string(),
            k: spec.k,
            n,
            mode,
            nodes,
            cache_hits,
            probability,
            elapsed_ms,
            heuristic: heuristic.clone(),
            budget_hit,
        };
        let psi = if spec.dichotomy {
            CompositeLineage::grounded_dichotomy(spec.comb.clone(), spec.k, n)?
        } else {
            CompositeLineage::grounded(spec.comb.clone(), spec.k, n)?
        };
        let mut found: Vec<(Mode, num_rational::BigRational)> = Vec::new();

        let start = Instant::now();
        match compile(&psi, &cfg.compile) {
            Ok((d, stats)) => {
                let p = wmc(&d, &cfg.weights)?.swap_remove(0);
                rows.push(row(
                    Mode::Grounded,
                    d.size() as u64,
                    stats.cache_hits as u64,
                    Some(p.to_string()),
                    start.elapsed().as_millis(),
                    false,
                ));
                found.push((Mode::Grounded, p));
            }
            Err(Error::BudgetExhausted { budget, stats }) => {
                let (nodes, hits) = stats.map_or((budget as u64, 0), |s| (s.nodes_created as u64, s.cache_hits as u64));
                rows.push(row(Mode::Grounded, nodes, hits, None, start.elapsed().as_millis(), true));
            }
            Err(e) => return Err(e),
        }

        if lifted {
            let start = Instant::now();
            let report = lifted_wmc_detailed(&spec.comb, spec.k, n, &cfg.weights)?;
            rows.push(row(
                Mode::Lifted,
                report.obdd_nodes() as u64,
                0,
                Some(report.probability.to_string()),
                start.elapsed().as_millis(),
                false,
            ));
            found.push((Mode::Lifted, report.probability));
        }

        let vars = psi.variables().len();
        if vars <= cfg.oracle_cap {
            let start = Instant::now();
            let p = brute_force_wmc_capped(&psi, &cfg.weights, cfg.oracle_cap)?;
            rows.push(row(
                Mode::Oracle,
                1u64 << vars,
                0,
                Some(p.to_string()),
                start.elapsed().as_millis(),
                false,
            ));
            found.push((Mode::Oracle, p));
        }

        if let Some((m, p)) = found.iter().find(|(_, p)| *p != found[0].1) {
            return Err(Error::WrongFunction(format!(
                "at n={n} {} gives {} but {m} gives {p}",
                found[0].0, found[0].1
            )));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_query_spec;

    #[test]
    fn three_way_agreement_at_one() {
        let spec = parse_query_spec("k=3\ncnf: 0 2 | 0 3 | 1 3\n").unwrap();
        let rows = run_separation("qw", &spec, &[1], &ExperimentConfig::default()).unwrap();
        let modes: Vec<Mode> = rows.iter().map(|r| r.mode).collect();
        assert_eq!(modes, vec![Mode::Grounded, Mode::Lifted, Mode::Oracle]);
        assert!(rows.iter().all(|r| r.probability == rows[0].probability && r.nodes >= 1));
    }

    #[test]
    fn unsafe_query_has_no_lifted_rows() {
        let spec = parse_query_spec("k=1\ncnf: 0 1\n").unwrap();
        let rows = run_separation("h1", &spec, &[2, 3], &ExperimentConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.mode != Mode::Lifted));
        let sizes: Vec<u64> = rows.iter().filter(|r| r.mode == Mode::Grounded).map(|r| r.nodes).collect();
        assert!(sizes[0] < sizes[1]);
    }

    #[test]
    fn budget_rows_and_empty_runs() {
        let spec = parse_query_spec("k=1\ncnf: 0 1\n").unwrap();
        let mut cfg = ExperimentConfig::default();
        assert_eq!(to_csv(&run_separation("h1", &spec, &[], &cfg).unwrap()), format!("{CSV_HEADER}\n"));
        cfg.compile.budget = 10;
        cfg.oracle_cap = 0;
        let rows = run_separation("h1", &spec, &[3], &cfg).unwrap();
        assert!(rows[0].budget_hit && rows[0].probability.is_none());
        let line = rows[0].to_csv();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 10);
        assert_eq!((fields[6], fields[8], fields[9]), ("", "first-unset", "true"));
    }
}
