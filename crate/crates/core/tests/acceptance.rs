//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use qcount_core::compiler::{compile, CompileConfig, Heuristic, NegationMode};
use qcount_core::diagram::{
    map_labels, project_output, validate, wmc, Diagram, DiagramClass, Label, Node, NodeId,
};
use qcount_core::formula::{Assignment, MonotoneDnf, VarId, WeightMap};
use qcount_core::lifted::{
    build_lattice_and_mobius, inclusion_exclusion_terms, is_safe, lifted_wmc_detailed, positive_cnf,
};
use qcount_core::lineage::{f_w, ground_hk_family, hk_variables, CombinatorFn, CompositeLineage};
use qcount_core::oracle::brute_force_wmc;
use qcount_core::transforms::{
    build_dichotomy_fbdd_with_stats, build_family_obdd_with, classify_dichotomy, dichotomy_size_bound,
    dldd_to_fbdd, family_size_bound, fbdd_to_multioutput_with_stats, follows_unit_rule, quasi_poly_bound,
    restricted_family, to_unit_rule_with_ledger, Dichotomy, DICHOTOMY_C,
};
use qcount_core::Error;

use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

fn configs() -> Vec<CompileConfig> {
    let mut out = Vec::new();
    for heuristic in [Heuristic::FirstUnset, Heuristic::MaxOccurrence] {
        for negation_mode in [NegationMode::DirectDnf, NegationMode::NegateToCnf] {
            out.push(CompileConfig {
                heuristic,
                negation_mode,
                ..CompileConfig::default()
            });
        }
    }
    out
}

fn shannon(heuristic: Heuristic) -> CompileConfig {
    CompileConfig {
        heuristic,
        components: false,
        ..CompileConfig::default()
    }
}

fn or_outputs(d: &Diagram) -> Diagram {
    map_labels(d, 1, |l| Label(u64::from(l.0 != 0)))
}

fn p0(d: &Diagram, w: &WeightMap) -> Result<BigRational, String> {
    wmc(d, w).map(|mut v| v.swap_remove(0)).map_err(|e| e.to_string())
}

fn easy_g() -> CombinatorFn {
    // (X0 ∨ B2) ∧ (B0 ∨ X1), k = 1.
    CombinatorFn::from_cnf(5, vec![vec![0, 4], vec![2, 1]]).unwrap()
}

fn xor2() -> CombinatorFn {
    CombinatorFn::from_fn(2, |x| x == 1 || x == 2)
}

fn c1_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut checked = 0usize;

    let mut lineages: Vec<(String, CompositeLineage)> = Vec::new();
    for n in 1..=3 {
        lineages.push((format!("h1 n={n}"), CompositeLineage::grounded(CombinatorFn::or_all(2), 1, n).unwrap()));
    }
    for n in 1..=2 {
        lineages.push((format!("h2 n={n}"), CompositeLineage::grounded(CombinatorFn::or_all(3), 2, n).unwrap()));
        lineages.push((format!("qw n={n}"), CompositeLineage::grounded(f_w(), 3, n).unwrap()));
        lineages.push((format!("xor n={n}"), CompositeLineage::grounded(xor2(), 1, n).unwrap()));
        lineages.push((format!("dicho n={n}"), CompositeLineage::grounded_dichotomy(easy_g(), 1, n).unwrap()));
    }
    for i in 0..12 {
        lineages.push((format!("dnf #{i}"), CompositeLineage::from_dnf(random_dnf(&mut rng, 14, 3))));
    }
    for (name, psi) in &lineages {
        let w = random_weights(psi.variables(), &mut rng);
        let want = brute_force_wmc(psi, &w).map_err(|e| e.to_string())?;
        for cfg in configs() {
            let (d, _) = compile(psi, &cfg).map_err(|e| format!("{name}: {e}"))?;
            ensure!(p0(&d, &w)? == want, "{name} {}/{}: compiled diagram disagrees", cfg.heuristic, cfg.negation_mode);
            let f = dldd_to_fbdd(&d, 5_000_000).map_err(|e| format!("{name}: {e}"))?;
            ensure!(validate(&f).class == DiagramClass::Fbdd, "{name}: converted diagram is not an FBDD");
            ensure!(p0(&f, &w)? == want, "{name}: dldd_to_fbdd output disagrees");
            checked += 2;
        }
    }

    // Unit-rule outputs for flat DNFs.
    let mut dnfs: Vec<MonotoneDnf> = (1..=3)
        .map(|n| {
            let fam = ground_hk_family(1, n).unwrap();
            fam[0].or(&fam[1])
        })
        .collect();
    dnfs.extend((0..12).map(|_| random_dnf(&mut rng, 12, 3)));
    for phi in &dnfs {
        if phi.is_constant() {
            continue;
        }
        let w = random_weights(phi.variables(), &mut rng);
        let want = brute_force_wmc(phi, &w).map_err(|e| e.to_string())?;
        let (f, _) = compile(&CompositeLineage::from_dnf(phi.clone()), &shannon(Heuristic::MaxOccurrence))
            .map_err(|e| e.to_string())?;
        let (u, _) = to_unit_rule_with_ledger(&f, phi).map_err(|e| e.to_string())?;
        ensure!(p0(&u, &w)? == want, "unit-rule output disagrees on {phi}");
        checked += 1;
    }

    // Family OBDDs, one output at a time.
    for k in 1..=3 {
        for n in 1..=2 {
            for _ in 0..4 {
                let theta = random_theta(&mut rng, k, n, 2);
                let mut subset: BTreeSet<usize> = (0..=k).filter(|_| rng.gen_bool(0.6)).collect();
                subset.insert(rng.gen_range(0..=k));
                let fam = build_family_obdd_with(&theta, &subset, k, n, 2).map_err(|e| e.to_string())?;
                let args = restricted_family(&theta, k, n);
                let w = random_weights(hk_variables(k, n), &mut rng);
                for (l, arg) in args.iter().enumerate() {
                    let want = if subset.contains(&l) {
                        brute_force_wmc(arg, &w).map_err(|e| e.to_string())?
                    } else {
                        BigRational::from_integer(0.into())
                    };
                    ensure!(p0(&project_output(&fam.diagram, l), &w)? == want, "family OBDD output {l} under {theta}");
                    checked += 1;
                }
            }
        }
    }

    // Multi-output conversion at n = 1.
    let combs = [(CombinatorFn::or_all(2), 1), (xor2(), 1), (CombinatorFn::or_all(3), 2), (f_w(), 3)];
    for (comb, k) in &combs {
        let psi = CompositeLineage::grounded(comb.clone(), *k, 1).unwrap();
        let (f, _) = compile(&psi, &shannon(Heuristic::FirstUnset)).map_err(|e| e.to_string())?;
        let (d, _) = fbdd_to_multioutput_with_stats(&f, comb, *k, 1).map_err(|e| e.to_string())?;
        let w = random_weights(psi.variables(), &mut rng);
        for (l, h) in ground_hk_family(*k, 1).unwrap().iter().enumerate() {
            ensure!(
                p0(&project_output(&d, l), &w)? == brute_force_wmc(h, &w).unwrap(),
                "multi-output {l} for k={k}"
            );
            checked += 1;
        }
        let combined = map_labels(&d, 1, |lab| Label(u64::from(comb.eval(lab.0 as usize))));
        ensure!(p0(&combined, &w)? == brute_force_wmc(&psi, &w).unwrap(), "combined multi-output for k={k}");
        checked += 1;
    }

    // Dichotomy FBDDs at n = 1.
    let g13 = CombinatorFn::from_cnf(13, vec![vec![0], vec![1, 9], vec![1, 11], vec![2, 3, 4, 5]]).unwrap();
    for (g, k) in [(easy_g(), 1), (g13, 5)] {
        let psi = CompositeLineage::grounded_dichotomy(g.clone(), k, 1).unwrap();
        let (d, _) = build_dichotomy_fbdd_with_stats(&g, k, 1).map_err(|e| e.to_string())?;
        let w = random_weights(psi.variables(), &mut rng);
        ensure!(p0(&d, &w)? == brute_force_wmc(&psi, &w).unwrap(), "dichotomy FBDD for k={k}");
        checked += 1;
    }

    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{checked} diagrams match the oracle in {:.1}s", elapsed.as_secs_f64()))
}

fn unit_rule_case(phi: &MonotoneDnf, heuristic: Heuristic) -> Result<f64, String> {
    let (f, _) = compile(&CompositeLineage::from_dnf(phi.clone()), &shannon(heuristic)).map_err(|e| e.to_string())?;
    let (u, _) = to_unit_rule_with_ledger(&f, phi).map_err(|e| e.to_string())?;
    ensure!(follows_unit_rule(&u, phi).map_err(|e| e.to_string())?, "output breaks the unit rule for {phi}");
    let bound = phi.max_degree() * f.size();
    ensure!(u.size() <= bound, "size {} exceeds Δ·N = {bound} for {phi}", u.size());
    Ok(u.size() as f64 / bound as f64)
}

fn c2_unit_rule() -> Outcome {
    let mut rng = rng(2);
    let mut worst = 0f64;
    let mut count = 0;
    while count < 200 {
        let phi = random_2dnf(&mut rng, 10);
        let h = if count % 2 == 0 { Heuristic::FirstUnset } else { Heuristic::MaxOccurrence };
        worst = worst.max(unit_rule_case(&phi, h)?);
        count += 1;
    }
    for n in 1..=3 {
        let fam = ground_hk_family(1, n).unwrap();
        let phi = fam[0].or(&fam[1]);
        for h in [Heuristic::FirstUnset, Heuristic::MaxOccurrence] {
            worst = worst.max(unit_rule_case(&phi, h)?);
        }
    }
    Ok(format!("200 random 2-DNFs and H_1 for n <= 3 follow the unit rule, worst size/(Δ·N) = {worst:.3}"))
}

fn c3_dldd_to_fbdd() -> Outcome {
    let mut rng = rng(3);
    let mut worst = 0f64;
    for case in 0..40 {
        let m = if case < 30 { rng.gen_range(4..=12) } else { 16 };
        let d = random_dldd(&mut rng, m);
        let f = dldd_to_fbdd(&d, 10_000_000).map_err(|e| e.to_string())?;
        ensure!(validate(&f).class == DiagramClass::Fbdd, "case {case}: output is {}", validate(&f).class);
        let bound = quasi_poly_bound(d.size());
        ensure!((f.size() as u128) <= bound, "case {case}: {} nodes exceed the bound {bound}", f.size());
        worst = worst.max(f.size() as f64 / d.size() as f64);
        let index: HashMap<VarId, usize> = (0..m).map(|i| (sym(i), i)).collect();
        for mask in 0..1u64 << m {
            ensure!(
                eval_mask(&d, &index, mask) == eval_mask(&f, &index, mask),
                "case {case}: differs at assignment {mask:#x}"
            );
        }
    }
    // FBDD inputs come back unchanged.
    for i in 0..20 {
        let phi = random_dnf(&mut rng, 10, 3);
        let (f, _) = compile(&CompositeLineage::from_dnf(phi), &shannon(Heuristic::FirstUnset)).unwrap();
        let g = dldd_to_fbdd(&f, 1_000_000).map_err(|e| e.to_string())?;
        ensure!(g == f, "FBDD input #{i} was changed");
    }
    Ok(format!("40 random DLDDs (up to 16 vars) convert exactly within N·2^(⌈log N⌉²), largest growth {worst:.1}x; 20 FBDD inputs unchanged"))
}

fn c4_family_obdd() -> Outcome {
    let mut rng = rng(4);
    let mut runs = 0;
    let mut worst_width = 0f64;
    let mut worst_size = 0f64;
    for k in 1..=3 {
        for n in 1..=8 {
            for _ in 0..3 {
                let max_t = rng.gen_range(0..=2);
                let theta = random_theta(&mut rng, k, n, max_t);
                let mut subset: BTreeSet<usize> = (0..=k).filter(|_| rng.gen_bool(0.7)).collect();
                subset.insert(rng.gen_range(0..=k));
                let fam = build_family_obdd_with(&theta, &subset, k, n, 2).map_err(|e| e.to_string())?;
                let t = fam.stats.t;
                ensure!(t <= 2, "t = {t}");
                let width_cap = 1usize << (k + 3);
                ensure!(fam.stats.max_width <= width_cap, "k={k} n={n}: width {} > {width_cap}", fam.stats.max_width);
                let cap = family_size_bound(k, t, n);
                ensure!((fam.diagram.size() as u128) <= cap, "k={k} n={n} t={t}: size {} > {cap}", fam.diagram.size());
                worst_width = worst_width.max(fam.stats.max_width as f64 / width_cap as f64);
                worst_size = worst_size.max(fam.diagram.size() as f64 / cap as f64);
                let args = restricted_family(&theta, k, n);
                if n <= 2 {
                    let w = random_weights(hk_variables(k, n), &mut rng);
                    for (l, arg) in args.iter().enumerate() {
                        let want = if subset.contains(&l) { brute_force_wmc(arg, &w).unwrap() } else { BigRational::from_integer(0.into()) };
                        ensure!(p0(&project_output(&fam.diagram, l), &w)? == want, "k={k} n={n} output {l}");
                    }
                } else {
                    let vars = hk_variables(k, n);
                    for _ in 0..32 {
                        let mut full = theta.clone();
                        for v in &vars {
                            if !full.contains(v) {
                                full.bind(v.clone(), rng.gen_bool(0.5)).unwrap();
                            }
                        }
                        let got = qcount_core::diagram::evaluate(&fam.diagram, &full).unwrap();
                        for (l, arg) in args.iter().enumerate() {
                            let want = subset.contains(&l) && arg.evaluate(&full).unwrap();
                            ensure!(got.bit(l) == want, "k={k} n={n} output {l} at a sampled point");
                        }
                    }
                }
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{runs} restrictions (k <= 3, t <= 2, n <= 8): widths at most {:.0}% of 2^(k+3), sizes at most {:.1}% of 64·k·2^(k+t)·n²",
        worst_width * 100.0,
        worst_size * 100.0
    ))
}

/// `μ(u, 1̂) = Σ (-1)^|S|` over sets `S` of clauses whose union is `u`.
fn crosscut_mu(clauses: &[Vec<usize>], u: u32) -> i64 {
    let masks: Vec<u32> = clauses.iter().map(|c| c.iter().fold(0, |a, &i| a | 1 << i)).collect();
    (0..1u32 << masks.len())
        .filter(|s| (0..masks.len()).filter(|i| s >> i & 1 == 1).fold(0, |a, i| a | masks[i]) == u)
        .map(|s| if s.count_ones() % 2 == 0 { 1 } else { -1 })
        .sum()
}

fn c5_mobius() -> Outcome {
    let single = build_lattice_and_mobius(&[vec![0, 1, 2, 3]]).map_err(|e| e.to_string())?;
    ensure!(single.elements.len() == 2 && single.mu_bottom() == -1, "single clause lattice {single}");
    let w = build_lattice_and_mobius(&positive_cnf(&f_w()).unwrap()).unwrap();
    ensure!(w.mu_bottom() == 0, "μ(0̂,1̂) for f_W is {}", w.mu_bottom());
    let mut rng = rng(5);
    let mut lattices = vec![single, w];
    let mut clause_lists = vec![vec![vec![0, 1, 2, 3]], positive_cnf(&f_w()).unwrap()];
    for _ in 0..60 {
        let m = rng.gen_range(1..=6);
        let clauses: Vec<Vec<usize>> = (0..m)
            .map(|_| {
                let mut c: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.35)).collect();
                if c.is_empty() {
                    c.push(rng.gen_range(0..6));
                }
                c
            })
            .collect();
        lattices.push(build_lattice_and_mobius(&clauses).unwrap());
        clause_lists.push(clauses);
    }
    let mut elements = 0;
    for (lat, clauses) in lattices.iter().zip(&clause_lists) {
        ensure!(lat.recursion_holds(), "recursion fails on {lat}");
        for (&u, &m) in lat.elements.iter().zip(&lat.mu).skip(1) {
            ensure!(m == crosscut_mu(clauses, u), "μ mismatch at {u:#b} in {lat}");
            elements += 1;
        }
    }
    Ok(format!(
        "single clause gives -1, f_W gives 0; recursion and crosscut values agree on {elements} elements of {} lattices",
        lattices.len()
    ))
}

fn c6_lifted() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(6);
    ensure!(is_safe(&f_w()).unwrap_or(false), "f_W is not classified safe");
    for n in 1..=2 {
        let psi = CompositeLineage::grounded(f_w(), 3, n).unwrap();
        for uniform in [true, false] {
            let w = if uniform { WeightMap::default() } else { random_weights(psi.variables(), &mut rng) };
            let got = lifted_wmc_detailed(&f_w(), 3, n, &w).map_err(|e| e.to_string())?.probability;
            let want = brute_force_wmc(&psi, &w).unwrap();
            ensure!(got == want, "n={n}: lifted {got} vs oracle {want}");
        }
    }
    let expansion = inclusion_exclusion_terms(&positive_cnf(&f_w()).unwrap());
    let set = |xs: &[u32]| xs.iter().fold(0u32, |a, &i| a | 1 << i);
    let mut expected = vec![
        (1, set(&[0, 2])),
        (1, set(&[0, 3])),
        (1, set(&[1, 3])),
        (-1, set(&[0, 2, 3])),
        (-1, set(&[0, 1, 3])),
        (-1, set(&[0, 1, 2, 3])),
        (1, set(&[0, 1, 2, 3])),
    ];
    let mut got = expansion.clone();
    expected.sort();
    got.sort();
    ensure!(got == expected, "expansion {got:?}");
    let report = lifted_wmc_detailed(&f_w(), 3, 2, &WeightMap::default()).unwrap();
    let mut table: Vec<(i64, u32)> = report.terms.iter().map(|t| (-t.mu, t.element)).collect();
    table.sort();
    let mut after_cancel: Vec<(i64, u32)> = expected.into_iter().filter(|&(_, u)| u != set(&[0, 1, 2, 3])).collect();
    after_cancel.sort();
    ensure!(table == after_cancel, "term table {table:?}");
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "f_W matches the oracle at n = 1, 2 under two weightings; 7-term expansion reduces to 5 terms ({:.1}s)",
        elapsed.as_secs_f64()
    ))
}

const LIFTED_C: usize = 80;
const SEPARATION_BUDGET: usize = 2_000_000;

fn c7_separation() -> Outcome {
    let w = WeightMap::default();
    let cfg = CompileConfig {
        heuristic: Heuristic::MaxOccurrence,
        budget: SEPARATION_BUDGET,
        ..CompileConfig::default()
    };
    let mut lifted_worst = 0f64;
    let mut grounded: Vec<(usize, Option<usize>)> = Vec::new();
    let mut agreements = 0;
    for n in 1..=12 {
        let report = lifted_wmc_detailed(&f_w(), 3, n, &w).map_err(|e| e.to_string())?;
        let nodes = report.obdd_nodes();
        ensure!(nodes <= LIFTED_C * n * n, "lifted nodes {nodes} > {LIFTED_C}·n² at n={n}");
        lifted_worst = lifted_worst.max(nodes as f64 / (n * n) as f64);
        let psi = CompositeLineage::grounded(f_w(), 3, n).unwrap();
        match compile(&psi, &cfg) {
            Ok((d, _)) => {
                let p = p0(&d, &w)?;
                ensure!(p == report.probability, "n={n}: grounded {p} vs lifted {}", report.probability);
                agreements += 1;
                grounded.push((n, Some(d.size())));
            }
            Err(Error::BudgetExhausted { .. }) => grounded.push((n, None)),
            Err(e) => return Err(e.to_string()),
        }
    }
    // Once the budget is hit it stays hit, so sizes are nondecreasing.
    let first_censored = grounded.iter().position(|(_, s)| s.is_none()).unwrap_or(grounded.len());
    ensure!(grounded[first_censored..].iter().all(|(_, s)| s.is_none()), "a larger n completed after a budget row");
    let completed: Vec<(usize, usize)> = grounded.iter().filter_map(|&(n, s)| s.map(|s| (n, s))).collect();
    ensure!(completed.windows(2).all(|p| p[0].1 <= p[1].1), "grounded sizes decrease: {completed:?}");
    let ratios: Vec<(usize, f64)> = completed
        .iter()
        .filter(|(n, _)| *n >= 4)
        .map(|&(n, s)| (n, s as f64 / (n * n * n) as f64))
        .collect();
    ensure!(!ratios.is_empty(), "no completed grounded run in [4, 12]");
    ensure!(ratios.windows(2).all(|p| p[0].1 < p[1].1), "size/n³ not increasing: {ratios:?}");
    let last = ratios.last().unwrap().1;
    for &(n, s) in &grounded {
        if s.is_none() && n >= 4 {
            let lower = SEPARATION_BUDGET as f64 / (n * n * n) as f64;
            ensure!(lower > last, "budget row n={n}: lower bound {lower:.0} does not exceed {last:.0}");
        }
    }
    let sizes: Vec<String> = completed.iter().map(|(n, s)| format!("{n}:{s}")).collect();
    Ok(format!(
        "lifted nodes <= {lifted_worst:.1}·n² (C = {LIFTED_C}); grounded sizes {}, n >= {} exceed {SEPARATION_BUDGET} nodes; {agreements} exact agreements",
        sizes.join(" "),
        first_censored + 1
    ))
}

fn lower_bound(n: usize) -> f64 {
    2f64.powi(n as i32 - 1) / n as f64
}

const FAMILY_MAX: usize = 12;
const SHANNON_MAX: usize = 7;
const CONVERTED_MAX: usize = 5;

fn c8_lower_bound() -> Outcome {
    let mut rng = rng(8);
    let mut produced = 0;
    let mut check = |what: &str, n: usize, d: &Diagram, reference: Option<&BigRational>, w: &WeightMap| -> Result<(), String> {
        ensure!(validate(d).class == DiagramClass::Fbdd, "{what} n={n} is not an FBDD");
        ensure!(d.size() as f64 >= lower_bound(n), "{what} n={n}: {} nodes < 2^(n-1)/n", d.size());
        if let Some(r) = reference {
            ensure!(&p0(d, w)? == r, "{what} n={n} computes a different function");
        }
        produced += 1;
        Ok(())
    };
    for n in 1..=FAMILY_MAX {
        let psi = CompositeLineage::grounded(CombinatorFn::or_all(2), 1, n).unwrap();
        let w = random_weights(psi.variables(), &mut rng);
        let fam = build_family_obdd_with(&Assignment::new(), &[0, 1].into(), 1, n, n).map_err(|e| e.to_string())?;
        let obdd = or_outputs(&fam.diagram);
        let reference = p0(&obdd, &w)?;
        if n <= 3 {
            ensure!(reference == brute_force_wmc(&psi, &w).unwrap(), "family OR at n={n} is wrong");
        }
        check("family OBDD", n, &obdd, None, &w)?;
        if n <= SHANNON_MAX {
            let fam1 = ground_hk_family(1, n).unwrap();
            let phi = fam1[0].or(&fam1[1]);
            for h in [Heuristic::FirstUnset, Heuristic::MaxOccurrence] {
                let (f, _) = compile(&psi, &shannon(h)).map_err(|e| e.to_string())?;
                check("Shannon compile", n, &f, Some(&reference), &w)?;
                let (u, _) = to_unit_rule_with_ledger(&f, &phi).map_err(|e| e.to_string())?;
                check("unit-rule output", n, &u, Some(&reference), &w)?;
            }
        }
        if n <= CONVERTED_MAX {
            for cfg in configs() {
                let (d, _) = compile(&psi, &cfg).map_err(|e| e.to_string())?;
                let f = dldd_to_fbdd(&d, 10_000_000).map_err(|e| e.to_string())?;
                check("dldd_to_fbdd output", n, &f, Some(&reference), &w)?;
            }
            let (f, _) = compile(&psi, &shannon(Heuristic::FirstUnset)).unwrap();
            let (m, _) = fbdd_to_multioutput_with_stats(&f, &CombinatorFn::or_all(2), 1, n).map_err(|e| e.to_string())?;
            check("multi-output OR", n, &or_outputs(&m), Some(&reference), &w)?;
        }
    }
    // The check itself must reject an undersized diagram.
    let tiny = {
        let mut b = qcount_core::diagram::DiagramBuilder::new(1);
        let one = b.constant(true);
        b.finish(one)
    };
    let rejected = check("constant", 6, &tiny, None, &WeightMap::default()).is_err();
    ensure!(rejected, "an undersized diagram passed the bound");
    Ok(format!(
        "{produced} FBDDs for H_1 meet 2^(n-1)/n: family OBDD n <= {FAMILY_MAX}, Shannon and unit-rule n <= {SHANNON_MAX}, converted and multi-output n <= {CONVERTED_MAX} (n = 13, 14 skipped: the family OBDD alone takes minutes there)"
    ))
}

/// Inserts `node` at position `pos`, shifting later ids.
fn insert_node(d: &Diagram, pos: NodeId, node: Node, redirect: impl Fn(NodeId, &Node) -> Node) -> Diagram {
    let shift = |c: NodeId| if c >= pos { c + 1 } else { c };
    let mut nodes: Vec<Node> = Vec::with_capacity(d.size() + 1);
    for (id, old) in d.nodes().iter().enumerate() {
        if id == pos {
            nodes.push(node.clone());
        }
        let moved = shift_children(old, shift);
        nodes.push(redirect(id, &moved));
    }
    Diagram::from_parts(nodes, d.outputs(), d.universe().to_vec()).expect("children first")
}

fn shift_children(n: &Node, f: impl Fn(NodeId) -> NodeId) -> Node {
    match n {
        Node::Sink(l) => Node::Sink(*l),
        Node::Decision { var, lo, hi } => Node::Decision { var: var.clone(), lo: f(*lo), hi: f(*hi) },
        Node::And(l, r) => Node::And(f(*l), f(*r)),
        Node::Or(l, r) => Node::Or(f(*l), f(*r)),
        Node::Xor(l, r) => Node::Xor(f(*l), f(*r)),
        Node::Equiv(l, r) => Node::Equiv(f(*l), f(*r)),
        Node::Not(c) => Node::Not(f(*c)),
        Node::NoOp(c) => Node::NoOp(f(*c)),
    }
}

fn tested_below(d: &Diagram, root: NodeId) -> BTreeSet<VarId> {
    let mut seen = vec![false; d.size()];
    let mut stack = vec![root];
    let mut vars = BTreeSet::new();
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        if let Node::Decision { var, .. } = d.node(id) {
            vars.insert(var.clone());
        }
        stack.extend(d.node(id).children());
    }
    vars
}

fn c9_mutations() -> Outcome {
    let mut rng = rng(9);
    let mut sources: Vec<Diagram> = Vec::new();
    for i in 0..10 {
        let phi = random_dnf(&mut rng, 12, 3);
        if phi.is_constant() {
            continue;
        }
        let mode = if i % 2 == 0 { NegationMode::NegateToCnf } else { NegationMode::DirectDnf };
        let cfg = CompileConfig { negation_mode: mode, ..CompileConfig::default() };
        sources.push(compile(&CompositeLineage::from_dnf(phi), &cfg).unwrap().0);
    }
    for n in 1..=2 {
        let psi = CompositeLineage::grounded(f_w(), 3, n).unwrap();
        let cfg = CompileConfig { negation_mode: NegationMode::NegateToCnf, ..CompileConfig::default() };
        sources.push(compile(&psi, &cfg).unwrap().0);
    }
    let with_and: Vec<&Diagram> = sources.iter().filter(|d| d.nodes().iter().any(|n| matches!(n, Node::And(..)))).collect();
    ensure!(!with_and.is_empty(), "no source diagram has an And node");
    let mut caught = 0;
    for m in 0..50 {
        if m % 2 == 0 {
            // Repeat a decision's test directly below it.
            let d = sources.choose(&mut rng).unwrap();
            let decisions: Vec<NodeId> = (0..d.size()).filter(|&i| matches!(d.node(i), Node::Decision { .. })).collect();
            let &u = decisions.choose(&mut rng).unwrap();
            let Node::Decision { var, lo, hi } = d.node(u).clone() else { unreachable!() };
            let go_hi = rng.gen_bool(0.5);
            let child = if go_hi { hi } else { lo };
            let dup = Node::Decision { var: var.clone(), lo: child, hi: child };
            let mutated = insert_node(d, u, dup, |id, n| match (id == u, n) {
                (true, Node::Decision { var, lo, hi }) if go_hi => Node::Decision { var: var.clone(), lo: *lo, hi: u },
                (true, Node::Decision { var, hi, .. }) => Node::Decision { var: var.clone(), lo: u, hi: *hi },
                _ => n.clone(),
            });
            let report = validate(&mutated);
            let Some(v) = report.read_once_violation else {
                return Err(format!("mutation {m}: duplicate test of {var} not reported"));
            };
            ensure!(v.var == var, "mutation {m}: witness names {} instead of {var}", v.var);
            ensure!(v.path.first() == Some(&mutated.root()), "mutation {m}: witness path does not start at the root");
            ensure!(
                v.path.windows(2).all(|p| mutated.node(p[0]).children().any(|c| c == p[1])),
                "mutation {m}: witness path is not a path"
            );
            let tests = v.path.iter().filter(|&&id| matches!(mutated.node(id), Node::Decision { var: x, .. } if *x == var)).count();
            ensure!(tests >= 2, "mutation {m}: witness path tests {var} {tests} time(s)");
            ensure!(report.class == DiagramClass::Invalid, "mutation {m}: class {}", report.class);
        } else {
            // Make the left child of an And mention a variable of its right child.
            let d = *with_and.choose(&mut rng).unwrap();
            let ands: Vec<NodeId> = (0..d.size()).filter(|&i| matches!(d.node(i), Node::And(..))).collect();
            let &a = ands.choose(&mut rng).unwrap();
            let Node::And(l, r) = *d.node(a) else { unreachable!() };
            let right_vars: Vec<VarId> = tested_below(d, r).into_iter().collect();
            let Some(y) = right_vars.choose(&mut rng).cloned() else {
                return Err(format!("mutation {m}: right child tests nothing"));
            };
            let wrap = Node::Decision { var: y.clone(), lo: l, hi: l };
            let mutated = insert_node(d, a, wrap, |id, n| match (id == a, n) {
                (true, Node::And(_, r)) => Node::And(a, *r),
                _ => n.clone(),
            });
            let report = validate(&mutated);
            let Some(v) = report.decomposability_violation else {
                return Err(format!("mutation {m}: shared {y} not reported"));
            };
            ensure!(v.node == a + 1, "mutation {m}: witness node {} instead of {}", v.node, a + 1);
            ensure!(v.shared == y, "mutation {m}: witness variable {} instead of {y}", v.shared);
            ensure!(report.class == DiagramClass::Invalid, "mutation {m}: class {}", report.class);
        }
        caught += 1;
    }
    Ok(format!("{caught}/50 seeded mutations caught with correct witnesses"))
}

fn c10_dichotomy() -> Outcome {
    let hard = CombinatorFn::from_cnf(9, vec![vec![0, 1], vec![1, 7], vec![2, 3]]).unwrap();
    ensure!(classify_dichotomy(&hard, 3).unwrap() == Dichotomy::Hard, "first example is not hard");
    ensure!(matches!(classify_dichotomy(&easy_g(), 1).unwrap(), Dichotomy::Easy(_)), "second example is not easy");
    let g13 = CombinatorFn::from_cnf(13, vec![vec![0], vec![1, 9], vec![1, 11], vec![2, 3, 4, 5]]).unwrap();
    ensure!(classify_dichotomy(&g13, 5).unwrap() == Dichotomy::Easy(1), "third example is not Easy(1)");
    let mut rng = rng(10);
    let mut sizes = Vec::new();
    for n in 1..=6 {
        let (d, stats) = build_dichotomy_fbdd_with_stats(&easy_g(), 1, n).map_err(|e| e.to_string())?;
        ensure!(validate(&d).class == DiagramClass::Fbdd, "n={n}: not an FBDD");
        let cap = dichotomy_size_bound(1, n);
        ensure!((d.size() as u128) <= cap, "n={n}: {} nodes > {DICHOTOMY_C}·n^4 = {cap}", d.size());
        ensure!(stats.layers == 4, "n={n}: {} layers", stats.layers);
        if n <= 2 {
            let psi = CompositeLineage::grounded_dichotomy(easy_g(), 1, n).unwrap();
            let w = random_weights(psi.variables(), &mut rng);
            ensure!(p0(&d, &w)? == brute_force_wmc(&psi, &w).unwrap(), "n={n}: wrong function");
        }
        sizes.push(d.size());
    }
    Ok(format!("Hard, Easy, Easy(s=1) reproduced; FBDD sizes {sizes:?} stay within {DICHOTOMY_C}·n^4"))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("oracle equivalence", c1_oracle_equivalence),
        ("unit rule", c2_unit_rule),
        ("DLDD to FBDD", c3_dldd_to_fbdd),
        ("transversal OBDD", c4_family_obdd),
        ("Möbius fixtures", c5_mobius),
        ("lifted correctness", c6_lifted),
        ("separation curve", c7_separation),
        ("lower-bound sanity", c8_lower_bound),
        ("structural mutations", c9_mutations),
        ("dichotomy", c10_dichotomy),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
