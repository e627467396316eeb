use perc_core::coupling::{activator_probability, sample_coupled, sandcastle_frequency, SandcastleConfig};
use perc_core::estimators::{
    density_target, estimate_curve, markov_check, q_set_and_interval, sharp_density_ratio, sprinkling_sequence, threshold,
    CurveMethod, HittingPool, ProbeMethod, ThresholdConfig,
};
use perc_core::graphs::Graph;
use perc_core::oracle::run_battery;
use perc_core::percolation::{clusters, simulate, two_point_profile, ReplicaRow};
use perc_core::stats::{MeanEstimate, Proportion, Z95};
use perc_core::structure::{dense_check, molecular_search, molecular_witness, separator, SeparatorMode, MAX_EXACT_SEPARATOR_VERTICES};
use rayon::prelude::*;
use serde_json::json;

use crate::cli::*;
use crate::error::{config, CliResult};
use crate::experiments;
use crate::output::{row_line, to_value, GraphInfo, Report, Table};

pub fn run(command: &Command) -> CliResult<Report> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Sim(a) => sim(a),
        Command::Sweep(a) => sweep(a),
        Command::Curve(a) => curve(a),
        Command::Threshold(a) => threshold_cmd(a),
        Command::Ratio(a) => ratio(a),
        Command::Twopoint(a) => twopoint(a),
        Command::Couple(a) => couple(a),
        Command::Sandcastle(a) => sandcastle(a),
        Command::Activate(a) => activate(a),
        Command::Separator(a) => separator_cmd(a),
        Command::Molecular(a) => molecular(a),
        Command::OracleValidate(a) => oracle_validate(a),
        Command::Experiment(a) => experiments::run(a),
    }
}

fn report(command: &str, cfg: &impl serde::Serialize, seed: Option<u64>, g: Option<&Graph>) -> Report {
    Report { command: command.into(), config: to_value(cfg), seed, graph: g.map(GraphInfo::of), ..Default::default() }
}

fn gen(a: &GenArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let mut r = report("gen", a, None, Some(&g));
    r.result = json!({
        "graph": serde_json::to_value(g.to_json()).expect("graph serialises"),
        "transitive": g.is_transitive(),
        "min_degree": g.min_degree(),
        "max_degree": g.max_degree(),
        "density": dense_check(&g),
        "orbit_sizes": g.edge_orbits().map(|o| o.iter().map(Vec::len).collect::<Vec<_>>()),
    });
    Ok(r)
}

fn sim(a: &SimArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let pairs = simulate(&g, a.p, a.replicas, a.seed)?;
    let n = g.n_vertices() as f64;
    let target = a.alpha.map(|al| density_target(al, g.n_vertices()));
    let mut r = report("sim", a, Some(a.seed), Some(&g));
    r.rows = pairs
        .iter()
        .enumerate()
        .map(|(i, &pair)| {
            let row = ReplicaRow::new(i as u64, a.p, pair);
            let row = match target {
                Some(t) => row.flag("k1_at_least_alpha", pair.k1 >= t),
                None => row,
            };
            row.to_line()
        })
        .collect();
    let k1: Vec<f64> = pairs.iter().map(|c| c.k1 as f64 / n).collect();
    let k2: Vec<f64> = pairs.iter().map(|c| c.k2 as f64 / n).collect();
    r.result = json!({
        "p": a.p,
        "replicas": a.replicas,
        "k1_density": MeanEstimate::from_samples(&k1),
        "k2_density": MeanEstimate::from_samples(&k2),
        "k1_at_least_alpha": target.map(|t| Proportion::from_counts(pairs.iter().filter(|c| c.k1 >= t).count() as u64, a.replicas)),
    });
    Ok(r)
}

fn sweep(a: &SweepArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let grid = a.grid.build()?;
    let mut pool = HittingPool::new(&g, a.alpha, a.seed)?;
    pool.grow_to(&g, a.replicas as usize);
    let mut r = report("sweep", a, Some(a.seed), Some(&g));
    r.rows = pool.times.iter().enumerate().map(|(i, &t)| row_line(&json!({ "replica": i, "hitting_time": t }))).collect();
    let estimates: Vec<_> = grid.iter().map(|&p| (p, pool.estimate(p, Z95))).collect();
    let mut lines = vec!["p,estimate,ci_lo,ci_hi".to_string()];
    lines.extend(estimates.iter().map(|(p, e)| format!("{p},{},{},{}", e.mean, e.lo, e.hi)));
    r.table = Some(Table {
        comments: vec![format!("P_p(|K1| >= {}) by Rao-Blackwellised sweeps, {} replicas", pool.target, pool.len())],
        lines,
    });
    r.result = json!({ "alpha": a.alpha, "target": pool.target, "replicas": pool.len(), "estimates": estimates.iter().map(|(p, e)| json!({"p": p, "estimate": e})).collect::<Vec<_>>() });
    Ok(r)
}

fn curve(a: &CurveArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let grid = a.grid.build()?;
    let method = match a.method {
        Method::Direct => CurveMethod::Direct,
        Method::SweepPool => CurveMethod::SweepPool,
    };
    let c = estimate_curve(&g, a.alpha, &grid, a.replicas, a.seed, method)?;
    let mut r = report("curve", a, Some(a.seed), Some(&g));
    r.table = Some(Table {
        comments: vec![
            format!("P_p(||K1|| >= {}) on {}, method {:?}, {} replicas per point", a.alpha, g.family().family, c.method, a.replicas),
            "f_hat is the isotonic fit; ci_lo/ci_hi are 95% Wilson bounds widened to contain it".into(),
        ],
        lines: c.to_csv_rows(),
    });
    let mut result = json!({ "alpha": a.alpha, "points": grid.len(), "max_ci_width": c.max_ci_width(), "method": c.method });
    if let Some(delta) = a.delta {
        let q = q_set_and_interval(&c, delta)?;
        let markov = markov_check(&c.p_grid, &c.f_hat, delta, 4.0)?;
        let strong = markov_check(&c.p_grid, &c.f_hat, delta, markov.epsilon_star.min(1.0))?;
        result["q_set"] = to_value(&q);
        result["markov"] = to_value(&markov);
        result["markov_strong"] = to_value(&strong);
        if let Some(count) = a.sprinkle {
            let seq = sprinkling_sequence(&|p| c.value(p), &q.cells, count)?;
            let check = seq.check(c.max_ci_width());
            result["sprinkling"] = json!({ "sequence": seq, "invariants_hold": check.is_ok() });
        }
    } else if a.sprinkle.is_some() {
        return Err(config("--sprinkle needs --delta"));
    }
    r.result = result;
    Ok(r)
}

fn search_config(s: &SearchArgs) -> ThresholdConfig {
    let d = ThresholdConfig::default();
    ThresholdConfig {
        method: match s.method {
            Method::Direct => ProbeMethod::Direct,
            Method::SweepPool => ProbeMethod::SweepPool,
        },
        z: s.z.unwrap_or(d.z),
        initial_replicas: s.initial_replicas.unwrap_or(d.initial_replicas),
        max_replicas: s.max_replicas.unwrap_or(d.max_replicas),
    }
}

fn threshold_cmd(a: &ThresholdArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let est = threshold(&g, a.alpha, a.delta, a.search.tolerance, a.search.seed, &search_config(&a.search))?;
    let mut r = report("threshold", a, Some(a.search.seed), Some(&g));
    if est.inconclusive {
        r.inconclusive = Some(format!("bracket [{}, {}] did not reach tolerance {}", est.p_lo, est.p_hi, a.search.tolerance));
    }
    r.result = to_value(&est);
    Ok(r)
}

fn ratio(a: &RatioArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let s = sharp_density_ratio(&g, a.beta, a.delta, a.search.tolerance, a.search.seed, &search_config(&a.search))?;
    let mut r = report("ratio", a, Some(a.search.seed), Some(&g));
    if s.inconclusive {
        r.inconclusive = Some(format!("ratio bracket [{}, {}] did not reach tolerance", s.ratio_lo, s.ratio_hi));
    }
    r.result = json!({ "ratio": s, "e_delta": a.delta.exp() });
    Ok(r)
}

fn twopoint(a: &TwoPointArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let prof = two_point_profile(&g, a.p, a.source, a.replicas, a.seed)?;
    let mut r = report("twopoint", a, Some(a.seed), Some(&g));
    r.rows = prof.estimates.iter().enumerate().map(|(v, e)| row_line(&json!({ "vertex": v, "estimate": e }))).collect();
    r.result = json!({ "p": a.p, "source": a.source, "replicas": a.replicas, "min_vertex": prof.min_vertex, "min_estimate": prof.min_estimate });
    Ok(r)
}

fn couple(a: &CoupleArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    // Validates (q, p) before the parallel loop.
    sample_coupled(&g, a.q, a.p, a.seed, 0)?;
    let samples: Vec<[usize; 4]> = (0..a.replicas)
        .into_par_iter()
        .map(|s| {
            let pair = sample_coupled(&g, a.q, a.p, a.seed, s).expect("parameters validated");
            let cp = clusters(&g, &pair.omega_p).expect("configuration matches graph");
            let cq = clusters(&g, &pair.omega_q).expect("configuration matches graph");
            assert!(cq.k1 <= cp.k1, "coupling must order the largest clusters");
            [cp.k1, cp.k2, cq.k1, cq.k2]
        })
        .collect();
    let n = g.n_vertices() as f64;
    let col = |i: usize| -> Vec<f64> { samples.iter().map(|s| s[i] as f64 / n).collect() };
    let mut r = report("couple", a, Some(a.seed), Some(&g));
    r.rows = samples
        .iter()
        .enumerate()
        .map(|(i, s)| row_line(&json!({ "replica": i, "k1_p": s[0], "k2_p": s[1], "k1_q": s[2], "k2_q": s[3] })))
        .collect();
    r.result = json!({
        "q": a.q, "p": a.p, "replicas": a.replicas,
        "k1_density_p": MeanEstimate::from_samples(&col(0)),
        "k2_density_p": MeanEstimate::from_samples(&col(1)),
        "k1_density_q": MeanEstimate::from_samples(&col(2)),
        "k2_density_q": MeanEstimate::from_samples(&col(3)),
    });
    Ok(r)
}

fn sandcastle(a: &SandcastleArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let cfg = SandcastleConfig { inner_replicas: a.inner, level: a.level, ..Default::default() };
    let f = sandcastle_frequency(&g, a.p, a.q, a.alpha, a.beta, a.replicas, a.seed, a.probes.as_deref(), &cfg)?;
    let mut r = report("sandcastle", a, Some(a.seed), Some(&g));
    r.rows = f.rows.iter().map(row_line).collect();
    let mut result = to_value(&f);
    result.as_object_mut().expect("object").remove("rows");
    result["sup"] = to_value(&f.sup());
    r.result = result;
    Ok(r)
}

fn parse_edges(g: &Graph, items: &[String]) -> CliResult<Vec<usize>> {
    items
        .iter()
        .map(|s| {
            let (u, v) = s.split_once('-').ok_or_else(|| config(format!("edge `{s}` is not of the form u-v")))?;
            let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| config(format!("bad vertex in edge `{s}`")));
            let (u, v) = (parse(u)?, parse(v)?);
            g.edge_index(u, v).ok_or_else(|| config(format!("{u}-{v} is not an edge")))
        })
        .collect()
}

fn activate(a: &ActivateArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let h: Vec<usize> = match (&a.edges, a.orbit) {
        (Some(items), None) => parse_edges(&g, items)?,
        (None, Some(o)) => {
            let orbits = g.edge_orbits().ok_or_else(|| config("graph declares no edge orbits"))?;
            orbits.get(o).cloned().ok_or_else(|| config(format!("orbit {o} out of range ({} orbits)", orbits.len())))?
        }
        (None, None) => Vec::new(),
        (Some(_), Some(_)) => unreachable!("clap rejects --edges with --orbit"),
    };
    let est = activator_probability(&g, &h, a.alpha, a.p, a.replicas, a.seed)?;
    let mut r = report("activate", a, Some(a.seed), Some(&g));
    r.result = json!({ "p": a.p, "alpha": a.alpha, "h_size": h.len(), "activation": est });
    Ok(r)
}

fn separator_cmd(a: &SeparatorArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let mode = match a.mode {
        SeparatorModeArg::Exact => SeparatorMode::Exact,
        SeparatorModeArg::Heuristic => SeparatorMode::Heuristic,
        SeparatorModeArg::Auto if g.n_vertices() <= MAX_EXACT_SEPARATOR_VERTICES => SeparatorMode::Exact,
        SeparatorModeArg::Auto => SeparatorMode::Heuristic,
    };
    let res = separator(&g, a.theta, mode, a.budget, a.seed)?;
    let mut r = report("separator", a, Some(a.seed), Some(&g));
    r.result = json!({ "separator": res, "cut_per_vertex": res.cut_size as f64 / g.n_vertices() as f64 });
    Ok(r)
}

fn molecular(a: &MolecularArgs) -> CliResult<Report> {
    let g = a.graph.build()?;
    let found = molecular_search(&g, a.c, a.m_max)?;
    let witness = match &found {
        Some(rep) => Some(molecular_witness(&g, rep, a.theta)?),
        None => None,
    };
    let mut r = report("molecular", a, None, Some(&g));
    r.result = json!({ "report": found, "witness": witness, "density": dense_check(&g) });
    Ok(r)
}

fn oracle_validate(a: &OracleArgs) -> CliResult<Report> {
    let b = run_battery(a.replicas, a.seed)?;
    let mut r = report("oracle-validate", a, Some(a.seed), None);
    r.rows = b.cells.iter().map(row_line).collect();
    if b.pass_fraction < a.min_pass_fraction || !b.russo_ok {
        r.failed = Some(format!("pass fraction {} (need {}), russo identity {}", b.pass_fraction, a.min_pass_fraction, b.russo_ok));
    }
    r.result = json!({ "replicas": b.replicas, "cells": b.cells.len(), "pass_fraction": b.pass_fraction, "russo_ok": b.russo_ok });
    Ok(r)
}
