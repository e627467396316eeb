use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_pair, draw_coupled, Subgraph};
use crate::error::{invalid, Result};
use crate::estimators::density_target;
use crate::graphs::Graph;
use crate::percolation::run_replicas;
use crate::rng::{tags, StreamKey};
use crate::stats::{Proportion, Z95};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandcastleConfig {
    /// Conditional (inner) replicas per scored subgraph.
    pub inner_replicas: u64,
    /// Probability level in the definition; the verdict compares the Wilson
    /// lower bound of the score against it.
    pub level: f64,
    pub z: f64,
}

impl Default for SandcastleConfig {
    fn default() -> Self {
        SandcastleConfig { inner_replicas: 64, level: 0.5, z: Z95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandcastleReport {
    /// Smallest vertex of the subgraph.
    pub subgraph_id: usize,
    pub density: f64,
    /// Estimate of `P(‖K1(ω_q ∩ S)‖ < α | S ⊆ ω_p)`.
    pub score: Proportion,
    pub is_sandcastle: bool,
}

/// `S` in local vertex indices, ready for repeated thinning.
struct LocalSubgraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl LocalSubgraph {
    fn new(g: &Graph, s: &Subgraph, index: &mut [u32]) -> Self {
        for (i, &v) in s.vertices.iter().enumerate() {
            index[v] = i as u32;
        }
        let edges = s
            .edges
            .iter()
            .map(|&e| {
                let (u, v) = g.edge(e);
                (index[u], index[v])
            })
            .collect();
        LocalSubgraph { n: s.vertices.len(), edges }
    }

    /// Number of inner replicas in which the largest cluster of the thinned
    /// subgraph has fewer than `target` vertices.
    fn score<R: Rng + ?Sized>(&self, keep: f64, target: usize, inner: u64, rng: &mut R, uf: &mut UnionFind) -> u64 {
        if keep >= 1.0 {
            return if self.n < target { inner } else { 0 };
        }
        if keep <= 0.0 {
            return if target > 1 { inner } else { 0 };
        }
        if uf.len() != self.n {
            *uf = UnionFind::new(self.n);
        }
        let mut small = 0;
        for _ in 0..inner {
            uf.reset();
            let mut largest = 1;
            for &(a, b) in &self.edges {
                if rng.random::<f64>() < keep {
                    if let Some((sa, sb)) = uf.union(a as usize, b as usize) {
                        largest = largest.max(sa + sb);
                    }
                }
            }
            if largest < target {
                small += 1;
            }
        }
        small
    }
}

fn check_unit_open(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in (0, 1], got {x}")))
    }
}

/// Scores a connected subgraph `S`: given `S ⊆ ω_p`, its edges lie in `ω_q`
/// independently with probability `q/p`, so the conditional law is sampled
/// by thinning `S` alone.
#[allow(clippy::too_many_arguments)]
pub fn sandcastle_score(
    g: &Graph,
    s: &Subgraph,
    q: f64,
    p: f64,
    alpha: f64,
    beta: f64,
    seed: u64,
    cfg: &SandcastleConfig,
) -> Result<SandcastleReport> {
    check_pair(q, p)?;
    if p <= 0.0 {
        return Err(invalid("p must be positive"));
    }
    check_unit_open(alpha, "α")?;
    if s.vertices.is_empty() || !s.is_connected(g) {
        return Err(invalid("S must be a nonempty connected subgraph"));
    }
    let mut index = vec![0u32; g.n_vertices()];
    let local = LocalSubgraph::new(g, s, &mut index);
    let target = density_target(alpha, g.n_vertices());
    let mut rng = StreamKey::new(seed).derive(tags::SANDCASTLE_INNER).rng(0);
    let mut uf = UnionFind::new(0);
    let small = local.score(q / p, target, cfg.inner_replicas, &mut rng, &mut uf);
    let score = Proportion::with_z(small, cfg.inner_replicas, cfg.z);
    let density = s.density(g);
    Ok(SandcastleReport {
        subgraph_id: s.vertices[0],
        density,
        is_sandcastle: density >= beta && score.lo >= cfg.level,
        score,
    })
}

/// Probe vertices `⌊j|V|/k⌋` for `j < k`.
pub fn default_probes(g: &Graph, k: usize) -> Vec<usize> {
    let n = g.n_vertices();
    let mut v: Vec<usize> = (0..k.min(n)).map(|j| j * n / k.min(n)).collect();
    v.dedup();
    v
}

/// One (outer replica, probe vertex) row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandcastleRow {
    pub replica: u64,
    pub probe: usize,
    pub cluster_size: usize,
    pub density: f64,
    /// Inner `(successes, trials)`, absent when `‖K_u‖ < β`.
    pub inner: Option<(u64, u64)>,
    pub is_sandcastle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandcastleFrequency {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub replicas: u64,
    pub probes: Vec<usize>,
    /// `P̂_p(K_u is a sandcastle)` per probe.
    pub per_probe: Vec<Proportion>,
    /// Index into `probes` of the largest estimate.
    pub sup_index: usize,
    pub p_k2_beta: Proportion,
    pub q_k2_alpha: Proportion,
    /// `β [P̂_p(‖K2‖ ≥ β) − 4 P̂_q(‖K2‖ ≥ α)]`.
    pub rhs: f64,
    /// Combined standard error of `sup − rhs`.
    pub sigma: f64,
    /// `sup ≥ rhs − 3σ`.
    pub holds: bool,
    pub rows: Vec<SandcastleRow>,
}

impl SandcastleFrequency {
    pub fn sup(&self) -> Proportion {
        self.per_probe[self.sup_index]
    }
}

struct OuterResult {
    rows: Vec<SandcastleRow>,
    p_k2: bool,
    q_k2: bool,
}

/// Nested Monte Carlo for sandcastle frequencies: outer replicas sample the
/// coupled pair, each probe's cluster `K_u(ω_p)` of density `≥ β` is scored
/// with inner conditional replicas, and both `‖K2‖` probabilities are read
/// off the same outer samples.
#[allow(clippy::too_many_arguments)]
pub fn sandcastle_frequency(
    g: &Graph,
    p: f64,
    q: f64,
    alpha: f64,
    beta: f64,
    replicas: u64,
    seed: u64,
    probes: Option<&[usize]>,
    cfg: &SandcastleConfig,
) -> Result<SandcastleFrequency> {
    check_pair(q, p)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("α must lie in (0, 1), got {alpha}")));
    }
    if !(beta > 0.0) {
        return Err(invalid(format!("β must be positive, got {beta}")));
    }
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    let probes: Vec<usize> = match probes {
        Some(v) => v.to_vec(),
        None => default_probes(g, 8),
    };
    if probes.is_empty() || probes.iter().any(|&v| v >= g.n_vertices()) {
        return Err(invalid("probe vertices must be nonempty and in range"));
    }
    let n = g.n_vertices();
    let a_target = density_target(alpha, n);
    let b_target = (beta * n as f64 - 1e-9).ceil().max(1.0) as usize;
    let outer_key = StreamKey::new(seed).derive(tags::COUPLED);
    let inner_key = StreamKey::new(seed).derive(tags::SANDCASTLE_INNER);
    let keep = if p > 0.0 { q / p } else { 1.0 };
    let n_probes = probes.len() as u64;

    let outer: Vec<OuterResult> = run_replicas(g, replicas, |s, r| {
        let mut rng = outer_key.rng(r);
        let mut open_q = Vec::new();
        let mut open_p = std::mem::take(&mut s.open);
        draw_coupled(g.n_edges(), q, p, &mut rng, &mut open_p, &mut open_q);
        s.open = open_p;
        s.uf.reset();
        for &e in &open_q {
            let (u, v) = g.edge(e as usize);
            s.uf.union(u, v);
        }
        let q_k2 = s.uf.top_two().1 >= a_target;
        s.union_open(g);
        let cd = s.decomposition();
        let p_k2 = cd.k2 >= b_target;
        let mut rows = Vec::with_capacity(probes.len());
        let mut cache: Vec<(u32, Option<(u64, u64)>, bool)> = Vec::new();
        let mut index = vec![0u32; n];
        let mut uf = UnionFind::new(0);
        for (j, &u) in probes.iter().enumerate() {
            let id = cd.representative[u];
            let size = cd.cluster_sizes[id as usize];
            let density = size as f64 / n as f64;
            let (inner, is_sandcastle) = match cache.iter().find(|c| c.0 == id) {
                Some(&(_, inner, verdict)) => (inner, verdict),
                None => {
                    let (inner, verdict) = if size >= b_target {
                        let vertices: Vec<usize> = (0..n).filter(|&v| cd.representative[v] == id).collect();
                        let edges: Vec<usize> = s
                            .open
                            .iter()
                            .map(|&e| e as usize)
                            .filter(|&e| cd.representative[g.edge(e).0] == id)
                            .collect();
                        let sub = Subgraph { vertices, edges };
                        let local = LocalSubgraph::new(g, &sub, &mut index);
                        let mut irng = inner_key.rng(r * n_probes + j as u64);
                        let small = local.score(keep, a_target, cfg.inner_replicas, &mut irng, &mut uf);
                        let w = Proportion::with_z(small, cfg.inner_replicas, cfg.z);
                        (Some((small, cfg.inner_replicas)), w.lo >= cfg.level)
                    } else {
                        (None, false)
                    };
                    cache.push((id, inner, verdict));
                    (inner, verdict)
                }
            };
            rows.push(SandcastleRow { replica: r, probe: u, cluster_size: size, density, inner, is_sandcastle });
        }
        OuterResult { rows, p_k2, q_k2 }
    });

    let per_probe: Vec<Proportion> = (0..probes.len())
        .map(|j| Proportion::from_counts(outer.iter().filter(|o| o.rows[j].is_sandcastle).count() as u64, replicas))
        .collect();
    let sup_index = (0..per_probe.len())
        .max_by(|&a, &b| per_probe[a].estimate.total_cmp(&per_probe[b].estimate).then(b.cmp(&a)))
        .unwrap();
    let p_k2_beta = Proportion::from_counts(outer.iter().filter(|o| o.p_k2).count() as u64, replicas);
    let q_k2_alpha = Proportion::from_counts(outer.iter().filter(|o| o.q_k2).count() as u64, replicas);
    let rhs = beta * (p_k2_beta.estimate - 4.0 * q_k2_alpha.estimate);
    let sup = per_probe[sup_index];
    let sigma = (sup.std_error().powi(2) + beta * beta * (p_k2_beta.std_error().powi(2) + 16.0 * q_k2_alpha.std_error().powi(2))).sqrt();
    let holds = sup.estimate >= rhs - 3.0 * sigma;
    Ok(SandcastleFrequency {
        p,
        q,
        alpha,
        beta,
        replicas,
        probes,
        per_probe,
        sup_index,
        p_k2_beta,
        q_k2_alpha,
        rhs,
        sigma,
        holds,
        rows: outer.into_iter().flat_map(|o| o.rows).collect(),
    })
}
