use serde::{Deserialize, Serialize};

use super::Subgraph;
use crate::error::{invalid, Result};
use crate::estimators::density_target;
use crate::graphs::Graph;
use crate::percolation::{check_probability, run_replicas};
use crate::rng::{tags, StreamKey};
use crate::stats::Proportion;

fn check_edges(g: &Graph, edges: &[usize]) -> Result<()> {
    match edges.iter().find(|&&e| e >= g.n_edges()) {
        Some(e) => Err(invalid(format!("edge {e} out of range"))),
        None => Ok(()),
    }
}

fn ceil_density(x: f64, n: usize) -> usize {
    (x * n as f64 - 1e-9).ceil().max(0.0) as usize
}

/// Per-replica measurements for the localization bound.
struct LocalizationSample {
    removed_k1: usize,
    k1: usize,
    k2: usize,
}

fn localization_samples(g: &Graph, h: &Subgraph, q: f64, replicas: u64, seed: u64) -> Result<Vec<LocalizationSample>> {
    check_probability(q, "q")?;
    if h.vertices.iter().any(|&v| v >= g.n_vertices()) {
        return Err(invalid("subgraph vertex out of range"));
    }
    let mut removed = vec![false; g.n_edges()];
    for e in h.closure_edges(g) {
        removed[e] = true;
    }
    let key = StreamKey::new(seed).derive(tags::LOCALIZATION);
    Ok(run_replicas(g, replicas, |s, r| {
        s.draw(g, q, &mut key.rng(r));
        s.union_open(g);
        let (k1, k2) = s.uf.top_two();
        s.uf.reset();
        for &e in &s.open {
            if !removed[e as usize] {
                let (u, v) = g.edge(e as usize);
                s.uf.union(u, v);
            }
        }
        LocalizationSample { removed_k1: s.uf.top_two().0, k1, k2 }
    }))
}

/// `P̂_q(‖K1(ω \ H̄)‖ ≥ β)`, with `H̄` every edge touching `V(H)`.
pub fn localization_probability(g: &Graph, h: &Subgraph, q: f64, beta: f64, replicas: u64, seed: u64) -> Result<Proportion> {
    let target = ceil_density(beta, g.n_vertices());
    let samples = localization_samples(g, h, q, replicas, seed)?;
    Ok(Proportion::from_counts(samples.iter().filter(|s| s.removed_k1 >= target).count() as u64, replicas))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationCheck {
    pub q: f64,
    pub beta: f64,
    pub h_density: f64,
    pub lhs: Proportion,
    pub k1_at_least_beta: Proportion,
    /// `P̂(‖K1‖ ∉ (β, β + β²‖H‖/2))`.
    pub k1_outside_window: Proportion,
    pub k2_at_least_beta: Proportion,
    /// `None` when the denominator `2β P(‖K1‖ ≥ β) − β²` is not positive.
    pub bound: Option<f64>,
    pub sigma: f64,
    /// `lhs ≤ bound + 3σ` (true when the bound is vacuous).
    pub holds: bool,
}

/// Measures both sides of the localization inequality
/// `P(‖K1(ω∖H̄)‖ ≥ β) ≤ (2−β²)/(2βP(‖K1‖≥β)−β²) · [P(‖K1‖ ∉ (β, β+β²‖H‖/2)) + P(‖K2‖ ≥ β)]`
/// from one set of replicas.
pub fn localization_check(g: &Graph, h: &Subgraph, q: f64, beta: f64, replicas: u64, seed: u64) -> Result<LocalizationCheck> {
    if !(beta > 0.0) {
        return Err(invalid("β must be positive"));
    }
    let n = g.n_vertices();
    let nf = n as f64;
    let samples = localization_samples(g, h, q, replicas, seed)?;
    let target = ceil_density(beta, n);
    let h_density = h.density(g);
    let upper = beta + 0.5 * beta * beta * h_density;
    let count = |f: &dyn Fn(&LocalizationSample) -> bool| Proportion::from_counts(samples.iter().filter(|s| f(s)).count() as u64, replicas);
    let lhs = count(&|s| s.removed_k1 >= target);
    let k1_at_least_beta = count(&|s| s.k1 >= target);
    let k1_outside_window = count(&|s| {
        let d = s.k1 as f64 / nf;
        !(d > beta && d < upper)
    });
    let k2_at_least_beta = count(&|s| s.k2 >= target);

    let c = 2.0 - beta * beta;
    let denom = 2.0 * beta * k1_at_least_beta.estimate - beta * beta;
    let sum = k1_outside_window.estimate + k2_at_least_beta.estimate;
    let (bound, sigma) = if denom > 0.0 {
        let b = c * sum / denom;
        let var_sum = k1_outside_window.std_error().powi(2) + k2_at_least_beta.std_error().powi(2);
        let d_denom = c * sum * 2.0 * beta / (denom * denom);
        let var_b = (c / denom).powi(2) * var_sum + d_denom.powi(2) * k1_at_least_beta.std_error().powi(2);
        (Some(b), (lhs.std_error().powi(2) + var_b).sqrt())
    } else {
        (None, lhs.std_error())
    };
    let holds = bound.is_none_or(|b| lhs.estimate <= b + 3.0 * sigma);
    Ok(LocalizationCheck {
        q,
        beta,
        h_density,
        lhs,
        k1_at_least_beta,
        k1_outside_window,
        k2_at_least_beta,
        bound,
        sigma,
        holds,
    })
}

/// Replica-wise activation outcome for several nested edge sets at once.
fn activations(g: &Graph, hs: &[&[usize]], alpha: f64, p: f64, replicas: u64, seed: u64) -> Result<Vec<Vec<bool>>> {
    check_probability(p, "p")?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("α must lie in (0, 1], got {alpha}")));
    }
    for h in hs {
        check_edges(g, h)?;
    }
    let target = density_target(alpha, g.n_vertices());
    let key = StreamKey::new(seed).derive(tags::ACTIVATOR);
    Ok(run_replicas(g, replicas, |s, r| {
        s.draw(g, p, &mut key.rng(r));
        s.union_open(g);
        let base = s.uf.top_two().0;
        let base_uf = if hs.len() > 1 { Some(s.uf.clone()) } else { None };
        hs.iter()
            .enumerate()
            .map(|(i, h)| {
                if i > 0 {
                    s.uf.clone_from(base_uf.as_ref().unwrap());
                }
                if base >= target {
                    return false;
                }
                let mut largest = base;
                for &e in h.iter() {
                    let (u, v) = g.edge(e);
                    if let Some((a, b)) = s.uf.union(u, v) {
                        largest = largest.max(a + b);
                    }
                }
                largest >= target
            })
            .collect()
    }))
}

/// `P̂_p(act_α(H))`: `ω ∉ A` but `ω ∪ H ∈ A`, for `A = {‖K1‖ ≥ α}`.
pub fn activator_probability(g: &Graph, h: &[usize], alpha: f64, p: f64, replicas: u64, seed: u64) -> Result<Proportion> {
    let hits = activations(g, &[h], alpha, p, replicas, seed)?;
    Ok(Proportion::from_counts(hits.iter().filter(|v| v[0]).count() as u64, replicas))
}

/// Activation probabilities for several edge sets on common samples, so that
/// nested sets give nested activation events replica by replica.
pub fn activator_probabilities(g: &Graph, hs: &[&[usize]], alpha: f64, p: f64, replicas: u64, seed: u64) -> Result<Vec<Proportion>> {
    let hits = activations(g, hs, alpha, p, replicas, seed)?;
    Ok((0..hs.len())
        .map(|i| Proportion::from_counts(hits.iter().filter(|v| v[i]).count() as u64, replicas))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCheck {
    pub q: f64,
    pub alpha: f64,
    pub delta: f64,
    pub tau: f64,
    /// `P̂(‖K2‖ ≥ 2δ)`.
    pub k2: Proportion,
    /// `P̂(|‖K1‖ − α| ≥ δ)`.
    pub deviation: Proportion,
    pub factor: f64,
    pub sigma: f64,
    /// `k2 ≤ factor · deviation + 3σ`.
    pub holds: bool,
}

/// Concentration-implies-uniqueness:
/// `P(‖K2‖ ≥ 2δ) ≤ (1 + 1/(4δ²τ)) P(|‖K1‖ − α| ≥ δ)`, with `τ` the measured
/// minimum two-point probability.
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_check(g: &Graph, q: f64, alpha: f64, delta: f64, tau: f64, replicas: u64, seed: u64) -> Result<UniquenessCheck> {
    check_probability(q, "q")?;
    if !(delta > 0.0) || !(tau > 0.0 && tau <= 1.0) {
        return Err(invalid("need δ > 0 and τ ∈ (0, 1]"));
    }
    let nf = g.n_vertices() as f64;
    let key = StreamKey::new(seed).derive(tags::SAMPLE);
    let pairs = run_replicas(g, replicas, |s, r| s.percolate(g, q, &mut key.rng(r)));
    let k2_target = ceil_density(2.0 * delta, g.n_vertices());
    let k2 = Proportion::from_counts(pairs.iter().filter(|&&(_, b)| b >= k2_target).count() as u64, replicas);
    let dev = pairs.iter().filter(|&&(a, _)| (a as f64 / nf - alpha).abs() >= delta - 1e-12).count() as u64;
    let deviation = Proportion::from_counts(dev, replicas);
    let factor = 1.0 + 1.0 / (4.0 * delta * delta * tau);
    let sigma = (k2.std_error().powi(2) + (factor * deviation.std_error()).powi(2)).sqrt();
    let holds = k2.estimate <= factor * deviation.estimate + 3.0 * sigma;
    Ok(UniquenessCheck { q, alpha, delta, tau, k2, deviation, factor, sigma, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cartesian_product, complete, path_pair, path_pair_bridge};
    use crate::oracle::exact_event;

    #[test]
    fn localization_extremes() {
        let g = complete(30).unwrap();
        let all = Subgraph::induced(&g, (0..30).collect()).unwrap();
        assert_eq!(localization_probability(&g, &all, 0.5, 0.1, 100, 1).unwrap().successes, 0);
        let empty = Subgraph { vertices: vec![], edges: vec![] };
        let c = localization_check(&g, &empty, 0.05, 0.5, 500, 1).unwrap();
        assert_eq!(c.lhs.successes, c.k1_at_least_beta.successes);
        assert!(c.lhs.successes > 0);
    }

    #[test]
    fn localization_inequality_on_complete_graph() {
        let n = 500;
        let g = complete(n).unwrap();
        let h = Subgraph::induced(&g, (0..50).collect()).unwrap();
        let c = localization_check(&g, &h, 2.0 / n as f64, 0.6, 2000, 5).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn empty_activator_never_activates() {
        let g = complete(20).unwrap();
        assert_eq!(activator_probability(&g, &[], 0.5, 0.1, 200, 1).unwrap().successes, 0);
    }

    #[test]
    fn bridge_activation_matches_oracle() {
        let g = path_pair(5).unwrap();
        let n = g.n_vertices();
        let bridge = path_pair_bridge(&g);
        let p = 0.8;
        let target = density_target(0.7, n);
        let lc = exact_event(&g, &|c| c.k1 < target && c.k1_with(1 << bridge) >= target).unwrap();
        let exact = lc.eval::<f64>(&p);
        let est = activator_probability(&g, &[bridge], 0.7, p, 40_000, 3).unwrap();
        assert!(est.covers_scaled(exact, 1.5), "{exact} vs {est:?}");
    }

    #[test]
    fn bridges_activate_two_giants() {
        let n = 300;
        let g = cartesian_product(&complete(n).unwrap(), &complete(2).unwrap()).unwrap();
        let bridges: Vec<usize> = (0..g.n_edges())
            .filter(|&e| {
                let (u, v) = g.edge(e);
                u / 2 == v / 2
            })
            .collect();
        assert_eq!(bridges.len(), n);
        let est = activator_probability(&g, &bridges, 0.6, 2.2 / n as f64, 400, 4).unwrap();
        assert!(est.estimate >= 0.05, "{est:?}");
    }

    #[test]
    fn activation_is_monotone_in_h() {
        let g = complete(60).unwrap();
        let small: Vec<usize> = (0..5).collect();
        let big: Vec<usize> = (0..40).collect();
        let hits = activations(&g, &[&small, &big], 0.4, 1.0 / 60.0, 300, 2).unwrap();
        for v in hits {
            assert!(!v[0] || v[1]);
        }
    }

    #[test]
    fn uniqueness_on_supercritical_complete() {
        let n = 1000;
        let g = complete(n).unwrap();
        let q = 2.0 / n as f64;
        let tp = crate::percolation::two_point_profile(&g, q, 0, 2000, 1).unwrap();
        let u = uniqueness_check(&g, q, 0.797, 0.05, tp.min_estimate.estimate, 2000, 2).unwrap();
        assert!(u.holds, "{u:?}");
    }
}
