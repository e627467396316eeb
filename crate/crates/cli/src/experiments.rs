//! Named reproduction bundles.

use clap::{Args, ValueEnum};
use perc_core::estimators::{sharp_density_ratio, ThresholdConfig};
use perc_core::graphs::{cartesian_product, complete, molecular_chain, torus, Graph};
use perc_core::percolation::run_replicas;
use perc_core::rng::{tags, StreamKey};
use perc_core::stats::{MeanEstimate, Proportion};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{config, CliResult};
use crate::output::{row_line, to_value, GraphInfo, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    /// K_n uniqueness: ‖K2‖ and |K2| against log n.
    KnGiant,
    /// Non-uniqueness on K_n □ K_2 at p = c/n.
    KnBoxK2,
    /// ‖K2‖ scaling on the square torus above threshold.
    Torus2dK2,
    /// Giant multiplicity on Z/2^k × Z/k (slow; needs --allow-slow).
    ElongatedTorus,
    /// Two-giant behaviour on the molecular chain at p = c/n.
    MolecularChain,
    /// Sharp density ratio across n for K_n and K_n □ K_2.
    SharpnessScan,
    /// P(‖K1‖ ≥ α) along supercritical K_n sequences.
    ExistenceScan,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    /// Sizes for the K_n □ K_2 half of sharpness-scan.
    #[arg(long, value_delimiter = ',')]
    pub box_ns: Option<Vec<usize>>,
    /// Scaled parameter: p = c/n.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub box_beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Threshold tolerance in units of 1/n.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub allow_slow: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl ExperimentName {
    fn keys(self) -> &'static [&'static str] {
        match self {
            ExperimentName::KnGiant => &["ns", "c", "replicas"],
            ExperimentName::KnBoxK2 => &["n", "c", "alpha", "replicas"],
            ExperimentName::Torus2dK2 => &["ns", "p", "replicas"],
            ExperimentName::ElongatedTorus => &["ns", "p", "alpha", "replicas", "allow_slow"],
            ExperimentName::MolecularChain => &["n", "c", "alpha", "exponent", "replicas"],
            ExperimentName::SharpnessScan => &["ns", "box_ns", "beta", "box_beta", "delta", "tolerance"],
            ExperimentName::ExistenceScan => &["ns", "c", "alpha", "replicas"],
        }
    }
}

/// Rejects parameters the named experiment does not use.
fn validate(a: &ExperimentArgs) -> CliResult<()> {
    let allowed = a.name.keys();
    let Value::Object(map) = to_value(a) else { unreachable!() };
    for (k, v) in map {
        if k == "name" || k == "seed" || v.is_null() || v == Value::Bool(false) {
            continue;
        }
        if !allowed.contains(&k.as_str()) {
            return Err(config(format!("experiment {:?} does not take --{}", a.name, k.replace('_', "-"))));
        }
    }
    Ok(())
}

fn positive(x: f64, name: &str) -> CliResult<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(config(format!("--{name} must be positive")))
    }
}

fn scaled(c: f64, n: usize) -> CliResult<f64> {
    let p = c / n as f64;
    if p > 1.0 {
        return Err(config(format!("c/n = {p} exceeds 1")));
    }
    Ok(p)
}

pub fn run(a: &ExperimentArgs) -> CliResult<Report> {
    validate(a)?;
    let mut r = Report { command: "experiment".into(), config: to_value(a), seed: Some(a.seed), ..Default::default() };
    match a.name {
        ExperimentName::KnGiant => kn_giant(a, &mut r)?,
        ExperimentName::KnBoxK2 => kn_box_k2(a, &mut r)?,
        ExperimentName::Torus2dK2 => torus_k2(a, &mut r)?,
        ExperimentName::ElongatedTorus => elongated(a, &mut r)?,
        ExperimentName::MolecularChain => chain(a, &mut r)?,
        ExperimentName::SharpnessScan => sharpness(a, &mut r)?,
        ExperimentName::ExistenceScan => existence(a, &mut r)?,
    }
    Ok(r)
}

/// `(|K1|, |K2|)` per replica, seeded per (experiment seed, size index).
fn pairs(g: &Graph, p: f64, replicas: u64, key: StreamKey) -> Vec<(usize, usize)> {
    run_replicas(g, replicas, |s, r| s.percolate(g, p, &mut key.rng(r)))
}

fn size_key(seed: u64, i: usize) -> StreamKey {
    StreamKey::new(seed).derive(tags::SAMPLE).derive(i as u64)
}

fn densities(v: &[(usize, usize)], n: usize) -> (MeanEstimate, MeanEstimate) {
    let nf = n as f64;
    let k1: Vec<f64> = v.iter().map(|x| x.0 as f64 / nf).collect();
    let k2: Vec<f64> = v.iter().map(|x| x.1 as f64 / nf).collect();
    (MeanEstimate::from_samples(&k1), MeanEstimate::from_samples(&k2))
}

fn kn_giant(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let ns = a.ns.clone().unwrap_or_else(|| vec![250, 500, 1000, 2000]);
    let c = positive(a.c.unwrap_or(2.0), "c")?;
    let replicas = a.replicas.unwrap_or(2000);
    let mut per_n = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let g = complete(n)?;
        let p = scaled(c, n)?;
        let v = pairs(&g, p, replicas, size_key(a.seed, i));
        r.rows.extend(v.iter().enumerate().map(|(rep, &(k1, k2))| row_line(&json!({ "n": n, "replica": rep, "k1": k1, "k2": k2 }))));
        let ln = (n as f64).ln();
        let (k1, k2) = densities(&v, n);
        let abs_k2 = MeanEstimate::from_samples(&v.iter().map(|x| x.1 as f64).collect::<Vec<_>>());
        let small = v.iter().filter(|x| x.1 as f64 <= 10.0 * ln).count() as u64;
        per_n.push(json!({
            "n": n, "p": p, "k1_density": k1, "k2_density": k2, "k2_size": abs_k2,
            "k2_size_over_ln_n": abs_k2.mean / ln,
            "k2_at_most_10_ln_n": Proportion::from_counts(small, replicas),
        }));
    }
    r.result = json!({ "c": c, "replicas": replicas, "sizes": per_n });
    Ok(())
}

fn kn_box_k2(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let n = a.n.unwrap_or(500);
    let c = positive(a.c.unwrap_or(2.0), "c")?;
    let alpha = a.alpha.unwrap_or(0.3);
    let replicas = a.replicas.unwrap_or(100_000);
    let g = cartesian_product(&complete(n)?, &complete(2)?)?;
    let p = scaled(c, n)?;
    let mut bridge = vec![false; g.n_edges()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        bridge[e] = u / 2 == v / 2;
    }
    let nv = g.n_vertices();
    let k2_target = (alpha * nv as f64 - 1e-9).ceil() as usize;
    let key = StreamKey::new(a.seed).derive(tags::SAMPLE);
    let v: Vec<(usize, usize, usize)> = run_replicas(&g, replicas, |s, rep| {
        s.draw(&g, p, &mut key.rng(rep));
        let bridges = s.open.iter().filter(|&&e| bridge[e as usize]).count();
        s.union_open(&g);
        let (k1, k2) = s.uf.top_two();
        (k1, k2, bridges)
    });
    r.rows = v
        .iter()
        .enumerate()
        .map(|(rep, &(k1, k2, b))| row_line(&json!({ "replica": rep, "k1": k1, "k2": k2, "bridges_open": b })))
        .collect();
    let no_bridge = v.iter().filter(|x| x.2 == 0).count() as u64;
    let k2_big = v.iter().filter(|x| x.1 >= k2_target).count() as u64;
    let two: Vec<(usize, usize)> = v.iter().map(|x| (x.0, x.1)).collect();
    let (k1, k2) = densities(&two, nv);
    r.graph = Some(GraphInfo::of(&g));
    r.result = json!({
        "n": n, "p": p, "replicas": replicas,
        "no_bridge_open": Proportion::from_counts(no_bridge, replicas),
        "poisson_reference": (-c).exp(),
        "exact_reference": (1.0 - p).powi(n as i32),
        "alpha": alpha,
        "k2_at_least_alpha": Proportion::from_counts(k2_big, replicas),
        "k1_density": k1, "k2_density": k2,
    });
    Ok(())
}

fn torus_k2(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let ns = a.ns.clone().unwrap_or_else(|| vec![16, 32, 64]);
    let p = a.p.unwrap_or(0.6);
    let replicas = a.replicas.unwrap_or(500);
    let mut per_n = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let g = torus(&[n, n])?;
        let v = pairs(&g, p, replicas, size_key(a.seed, i));
        r.rows.extend(v.iter().enumerate().map(|(rep, &(k1, k2))| row_line(&json!({ "n": n, "replica": rep, "k1": k1, "k2": k2 }))));
        let (k1, k2) = densities(&v, g.n_vertices());
        let abs_k2 = MeanEstimate::from_samples(&v.iter().map(|x| x.1 as f64).collect::<Vec<_>>());
        let log2 = (g.n_vertices() as f64).ln().powi(2);
        per_n.push(json!({ "n": n, "k1_density": k1, "k2_density": k2, "k2_size": abs_k2, "k2_size_over_log_sq": abs_k2.mean / log2 }));
    }
    r.result = json!({ "p": p, "replicas": replicas, "sizes": per_n });
    Ok(())
}

fn elongated(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    if !a.allow_slow {
        return Err(config("elongated-torus is slow; pass --allow-slow"));
    }
    let ks = a.ns.clone().unwrap_or_else(|| vec![4, 5, 6, 7]);
    let p = a.p.unwrap_or(0.6);
    let alpha = a.alpha.unwrap_or(0.05);
    let replicas = a.replicas.unwrap_or(200);
    let mut per_k = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        if k >= 24 {
            return Err(config("elongated-torus needs k < 24"));
        }
        let g = torus(&[1 << k, k])?;
        let nv = g.n_vertices();
        let target = (alpha * nv as f64 - 1e-9).ceil().max(1.0) as usize;
        let key = size_key(a.seed, i);
        let v: Vec<(usize, usize, usize)> = run_replicas(&g, replicas, |s, rep| {
            s.draw(&g, p, &mut key.rng(rep));
            s.union_open(&g);
            let cd = s.decomposition();
            (cd.k1, cd.k2, cd.sizes.iter().take_while(|&&x| x >= target).count())
        });
        r.rows.extend(
            v.iter()
                .enumerate()
                .map(|(rep, &(k1, k2, m))| row_line(&json!({ "k": k, "replica": rep, "k1": k1, "k2": k2, "giants": m }))),
        );
        let giants = MeanEstimate::from_samples(&v.iter().map(|x| x.2 as f64).collect::<Vec<_>>());
        let multi = v.iter().filter(|x| x.2 >= 2).count() as u64;
        per_k.push(json!({ "k": k, "dims": [1usize << k, k], "giants": giants, "two_or_more_giants": Proportion::from_counts(multi, replicas) }));
    }
    r.result = json!({ "p": p, "alpha": alpha, "replicas": replicas, "slow": true, "sizes": per_k });
    Ok(())
}

fn chain(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let n = a.n.unwrap_or(40);
    let c = positive(a.c.unwrap_or(0.75), "c")?;
    let alpha = a.alpha.unwrap_or(0.1);
    let exponent = a.exponent.unwrap_or(0.3);
    let replicas = a.replicas.unwrap_or(2000);
    let g = molecular_chain(n, exponent)?;
    let p = scaled(c, n)?;
    let v = pairs(&g, p, replicas, StreamKey::new(a.seed).derive(tags::SAMPLE));
    r.rows = v.iter().enumerate().map(|(rep, &(k1, k2))| row_line(&json!({ "replica": rep, "k1": k1, "k2": k2 }))).collect();
    let target = (alpha * g.n_vertices() as f64 - 1e-9).ceil() as usize;
    let two = v.iter().filter(|x| x.1 >= target).count() as u64;
    let (k1, k2) = densities(&v, g.n_vertices());
    r.graph = Some(GraphInfo::of(&g));
    r.result = json!({
        "n": n, "p": p, "replicas": replicas, "alpha": alpha,
        "k2_at_least_alpha": Proportion::from_counts(two, replicas),
        "k1_density": k1, "k2_density": k2,
    });
    Ok(())
}

fn sharpness(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let ns = a.ns.clone().unwrap_or_else(|| vec![100, 400, 1600]);
    let box_ns = a.box_ns.clone().unwrap_or_else(|| vec![100, 400]);
    let beta = a.beta.unwrap_or(0.5);
    let box_beta = a.box_beta.unwrap_or(0.9);
    let delta = a.delta.unwrap_or(0.1);
    let tol = positive(a.tolerance.unwrap_or(1e-3), "tolerance")?;
    let cfg = ThresholdConfig::default();
    let mut out = Vec::new();
    let mut inconclusive = Vec::new();
    for (family, sizes, b) in [("complete", &ns, beta), ("kn-box-k2", &box_ns, box_beta)] {
        let mut rows = Vec::new();
        for &n in sizes.iter() {
            let g = if family == "complete" { complete(n)? } else { cartesian_product(&complete(n)?, &complete(2)?)? };
            let s = sharp_density_ratio(&g, b, delta, tol / n as f64, a.seed, &cfg)?;
            if s.inconclusive {
                inconclusive.push(format!("{family} n={n}"));
            }
            let row = json!({
                "family": family, "n": n, "beta": b, "delta": delta, "ratio": s.ratio, "ratio_lo": s.ratio_lo, "ratio_hi": s.ratio_hi,
                "lower_c": s.lower.p_hat * n as f64, "upper_c": s.upper.p_hat * n as f64, "inconclusive": s.inconclusive,
            });
            r.rows.push(row_line(&row));
            rows.push(row);
        }
        let ratios: Vec<f64> = rows.iter().map(|x| x["ratio"].as_f64().unwrap()).collect();
        out.push(json!({
            "family": family,
            "beta": b,
            "rows": rows,
            "decreasing": ratios.windows(2).all(|w| w[1] < w[0]),
        }));
    }
    r.result = json!({ "delta": delta, "e_delta": delta.exp(), "families": out, "inconclusive": inconclusive });
    Ok(())
}

fn existence(a: &ExperimentArgs, r: &mut Report) -> CliResult<()> {
    let ns = a.ns.clone().unwrap_or_else(|| vec![100, 200, 400, 800]);
    let c = positive(a.c.unwrap_or(2.0), "c")?;
    let alpha = a.alpha.unwrap_or(0.5);
    let replicas = a.replicas.unwrap_or(2000);
    let mut per_n = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        let g = complete(n)?;
        let target = (alpha * n as f64 - 1e-9).ceil() as usize;
        let v = pairs(&g, scaled(c, n)?, replicas, size_key(a.seed, i));
        r.rows.extend(v.iter().enumerate().map(|(rep, &(k1, k2))| row_line(&json!({ "n": n, "replica": rep, "k1": k1, "k2": k2 }))));
        let hits = v.iter().filter(|x| x.0 >= target).count() as u64;
        per_n.push(json!({ "n": n, "k1_at_least_alpha": Proportion::from_counts(hits, replicas) }));
    }
    r.result = json!({ "c": c, "alpha": alpha, "replicas": replicas, "sizes": per_n });
    Ok(())
}
