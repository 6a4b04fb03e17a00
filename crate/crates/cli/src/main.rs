use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcount_core::compiler::{compile, CompileConfig, Heuristic, NegationMode, DEFAULT_BUDGET};
use qcount_core::diagram::{read_mdd, to_dot, validate, wmc, write_mdd, Diagram};
use qcount_core::experiment::{run_separation, to_csv, ExperimentConfig};
use qcount_core::formula::WeightMap;
use qcount_core::io::{
    parse_assignment, parse_formula, parse_lineage, parse_query_spec, parse_weights, to_decimal, write_lineage,
    QuerySpec,
};
use qcount_core::lifted::{build_lattice_and_mobius, lifted_wmc_detailed, positive_cnf};
use qcount_core::lineage::CompositeLineage;
use qcount_core::oracle::brute_force_wmc;
use qcount_core::transforms::{
    build_dichotomy_fbdd_with_stats, build_family_obdd_with, classify_dichotomy, dldd_to_fbdd, find_transversals,
    hk_units, to_unit_rule_with_ledger, Dichotomy, DEFAULT_MAX_TRANSVERSALS,
};
use qcount_core::Error;

#[derive(Parser)]
#[command(name = "qcount", about = "Grounded and lifted model counting for the H_k query family")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Mdd,
    Dot,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Diagram output format; `csv` prints statistics only.
    #[arg(long, value_enum, default_value = "mdd")]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileOpts {
    #[arg(long, default_value = "first-unset")]
    heuristic: Heuristic,
    #[arg(long, default_value = "direct-dnf")]
    negation_mode: NegationMode,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Never split into components, so the result is a plain FBDD.
    #[arg(long)]
    no_components: bool,
}

impl CompileOpts {
    fn config(&self) -> CompileConfig {
        CompileConfig {
            heuristic: self.heuristic,
            negation_mode: self.negation_mode,
            budget: self.budget,
            components: !self.no_components,
            ..CompileConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Ground a query spec into a composite lineage file.
    Ground {
        spec: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a lineage (or a query spec with --n) into a diagram.
    Compile {
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        opts: CompileOpts,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Turn a DLDD into an equivalent FBDD.
    Convert {
        diagram: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Rewrite an FBDD for a monotone formula so that it follows the unit rule.
    Unitrule {
        diagram: PathBuf,
        formula: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Transversals and H_k-units of the family restricted by an assignment.
    Transversals {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Bindings such as `R(1)=1,S1(1,2)=0`.
        #[arg(long, default_value = "")]
        theta: String,
        /// Also emit the family OBDD restricted to these outputs, e.g. `0,1`.
        #[arg(long)]
        subset: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Lifted probability of a safe query spec, with its term table.
    Lifted {
        spec: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Write the term table CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact probability by enumeration.
    Oracle {
        input: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Safety of a query spec, or the hard/easy side for a dichotomy spec.
    Classify { spec: PathBuf },
    /// Layered FBDD for an easy dichotomy spec.
    Dicho {
        spec: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Grounded, lifted and oracle runs over a range of domain sizes.
    Experiment {
        spec: PathBuf,
        /// `a..b` (inclusive), a comma list, or a single size.
        #[arg(long)]
        n: String,
        #[command(flatten)]
        opts: CompileOpts,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        oracle_cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Class of a diagram, with a witness when it is invalid.
    Validate { diagram: PathBuf },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Run<T> = Result<T, Failure>;

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Run<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Domain(Error::Io(e))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn weights(path: &Option<PathBuf>) -> Run<WeightMap> {
    match path {
        Some(p) => Ok(parse_weights(&read(p)?)?),
        None => Ok(WeightMap::default()),
    }
}

fn spec_with_n(path: &Path, n: Option<usize>) -> Run<(QuerySpec, usize)> {
    let spec = parse_query_spec(&read(path)?)?;
    let n = n
        .or(spec.n)
        .ok_or_else(|| Failure::Usage("a domain size is needed: pass --n or put `n=` in the spec".into()))?;
    Ok((spec, n))
}

fn ground(spec: &QuerySpec, n: usize) -> Run<CompositeLineage> {
    Ok(if spec.dichotomy {
        CompositeLineage::grounded_dichotomy(spec.comb.clone(), spec.k, n)?
    } else {
        CompositeLineage::grounded(spec.comb.clone(), spec.k, n)?
    })
}

fn lineage_input(path: &Path, n: Option<usize>) -> Run<CompositeLineage> {
    match n {
        Some(_) => {
            let (spec, n) = spec_with_n(path, n)?;
            ground(&spec, n)
        }
        None => Ok(parse_lineage(&read(path)?)?),
    }
}

/// Writes the diagram in the chosen format; statistics go to stdout for
/// `csv` and to stderr otherwise.
fn emit(d: &Diagram, output: &Output, header: &str, row: &str) -> Run<()> {
    match output.format {
        Format::Csv => write_out(&output.out, &format!("{header}\n{row}\n")),
        Format::Mdd | Format::Dot => {
            let text = match output.format {
                Format::Dot => to_dot(d),
                _ => write_mdd(d),
            };
            eprintln!("{header}\n{row}");
            write_out(&output.out, &text)
        }
    }
}

fn parse_ns(s: &str) -> Run<Vec<usize>> {
    let bad = || Failure::Usage(format!("cannot read domain sizes `{s}`"));
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn run(cmd: Cmd) -> Run<()> {
    match cmd {
        Cmd::Ground { spec, n, out } => {
            let (spec, n) = spec_with_n(&spec, n)?;
            write_out(&out, &write_lineage(&ground(&spec, n)?))
        }
        Cmd::Compile { input, n, opts, weights: wpath, output } => {
            let psi = lineage_input(&input, n)?;
            let (d, stats) = compile(&psi, &opts.config())?;
            let p = wmc(&d, &weights(&wpath)?)?.swap_remove(0);
            let row = format!(
                "{},{},{},{},{},{},{},{}",
                d.size(),
                validate(&d).class,
                stats.cache_hits,
                stats.cache_misses,
                stats.decisions,
                stats.component_splits,
                stats.elapsed.as_millis(),
                p
            );
            emit(
                &d,
                &output,
                "nodes,class,cache_hits,cache_misses,decisions,component_splits,elapsed_ms,probability",
                &row,
            )
        }
        Cmd::Convert { diagram, budget, output } => {
            let d = read_mdd(&read(&diagram)?)?;
            let f = dldd_to_fbdd(&d, budget)?;
            emit(&f, &output, "input_nodes,output_nodes", &format!("{},{}", d.size(), f.size()))
        }
        Cmd::Unitrule { diagram, formula, output } => {
            let d = read_mdd(&read(&diagram)?)?;
            let phi = parse_formula(&read(&formula)?)?;
            let (u, ledger) = to_unit_rule_with_ledger(&d, &phi)?;
            emit(
                &u,
                &output,
                "input_nodes,output_nodes,new_units,max_degree",
                &format!("{},{},{},{}", d.size(), u.size(), ledger.total(), phi.max_degree()),
            )
        }
        Cmd::Transversals { k, n, theta, subset, output } => {
            let theta = parse_assignment(&theta)?;
            let t = find_transversals(&theta, k, n);
            let pairs: Vec<String> = t.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
            let mut units: Vec<String> = hk_units(&theta, k, n).iter().map(|v| v.to_string()).collect();
            if units.is_empty() {
                units.push("none".into());
            }
            let summary = format!(
                "transversals: {}\nmax_independent: {}\nunits: {}",
                pairs.join(" "),
                t.max_independent,
                units.join(" ")
            );
            match subset {
                None => write_out(&output.out, &format!("{summary}\n")),
                Some(s) => {
                    let subset: BTreeSet<usize> = s
                        .split(',')
                        .map(|x| x.trim().parse().map_err(|_| Failure::Usage(format!("bad subset `{s}`"))))
                        .collect::<Run<_>>()?;
                    let fam = build_family_obdd_with(&theta, &subset, k, n, DEFAULT_MAX_TRANSVERSALS)?;
                    eprintln!("{summary}");
                    emit(
                        &fam.diagram,
                        &output,
                        "nodes,t,branch_depth,leaves,max_width",
                        &format!(
                            "{},{},{},{},{}",
                            fam.diagram.size(),
                            fam.stats.t,
                            fam.stats.branch_depth,
                            fam.stats.leaves,
                            fam.stats.max_width
                        ),
                    )
                }
            }
        }
        Cmd::Lifted { spec, n, weights: wpath, out } => {
            let (spec, n) = spec_with_n(&spec, n)?;
            if spec.dichotomy {
                return Err(Error::Unsupported("lifted evaluation takes a k+1-ary combinator".into()).into());
            }
            let report = lifted_wmc_detailed(&spec.comb, spec.k, n, &weights(&wpath)?)?;
            let mut table = String::from("element,mu,probability\n");
            for t in &report.terms {
                table.push_str(&format!("\"{}\",{},{}\n", t.element_string(), t.mu, t.probability));
            }
            let summary = format!(
                "p = {}\ndecimal = {}\nobdd_nodes = {}",
                report.probability,
                to_decimal(&report.probability, 12),
                report.obdd_nodes()
            );
            match out {
                Some(_) => {
                    println!("{summary}");
                    write_out(&out, &table)
                }
                None => {
                    println!("{summary}\n");
                    write_out(&None, &table)
                }
            }
        }
        Cmd::Oracle { input, n, weights: wpath } => {
            let psi = lineage_input(&input, n)?;
            let p = brute_force_wmc(&psi, &weights(&wpath)?)?;
            println!("p = {p}");
            Ok(())
        }
        Cmd::Classify { spec } => {
            let spec = parse_query_spec(&read(&spec)?)?;
            if spec.dichotomy {
                match classify_dichotomy(&spec.comb, spec.k)? {
                    Dichotomy::Hard => println!("hard"),
                    Dichotomy::Easy(s) => println!("easy s={s}"),
                }
            } else {
                let clauses = positive_cnf(&spec.comb)?;
                if clauses.is_empty() {
                    println!("safe (constant)");
                } else {
                    let mu = build_lattice_and_mobius(&clauses)?.mu_bottom();
                    println!("{} mu={mu}", if mu == 0 { "safe" } else { "unsafe" });
                }
            }
            Ok(())
        }
        Cmd::Dicho { spec, n, output } => {
            let (spec, n) = spec_with_n(&spec, n)?;
            if !spec.dichotomy {
                return Err(Failure::Usage("dicho needs a spec with arity=2k+3".into()));
            }
            let (d, stats) = build_dichotomy_fbdd_with_stats(&spec.comb, spec.k, n)?;
            emit(
                &d,
                &output,
                "nodes,layers,tree_nodes,leaves",
                &format!("{},{},{},{}", d.size(), stats.layers, stats.tree_nodes, stats.leaves),
            )
        }
        Cmd::Experiment { spec, n, opts, weights: wpath, oracle_cap, out } => {
            let id = spec.file_stem().map_or_else(|| "query".into(), |s| s.to_string_lossy().into_owned());
            let spec = parse_query_spec(&read(&spec)?)?;
            let ns = parse_ns(&n)?;
            let cfg = ExperimentConfig {
                compile: opts.config(),
                weights: weights(&wpath)?,
                oracle_cap,
            };
            let rows = run_separation(&id, &spec, &ns, &cfg)?;
            write_out(&out, &to_csv(&rows))
        }
        Cmd::Validate { diagram } => {
            let d = read_mdd(&read(&diagram)?)?;
            let report = validate(&d);
            println!("{}", report.class);
            if report.read_once_violation.is_some() || report.decomposability_violation.is_some() {
                println!("{}", report.describe());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {}: {}", e.name(), e.to_string().replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
