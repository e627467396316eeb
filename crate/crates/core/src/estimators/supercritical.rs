use serde::{Deserialize, Serialize};

use super::curve::density_target;
use super::threshold::{threshold, ThresholdConfig, ThresholdEstimate};
use crate::error::{invalid, Result};
use crate::graphs::Graph;
use crate::percolation::{check_probability, run_replicas, simulate};
use crate::rng::{tags, StreamKey};
use crate::stats::Proportion;

/// One-sided 95% normal quantile.
pub const Z95_ONE_SIDED: f64 = 1.644_853_626_951_472_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupercriticalReport {
    pub p: f64,
    pub epsilon: f64,
    /// `|V| ≥ 2ε⁻³`.
    pub size_clause: bool,
    /// Estimate of `P_{(1-ε)p}(‖K1‖ ≥ ε)`, absent when the size clause fails.
    pub estimate: Option<Proportion>,
    pub verdict: Verdict,
}

/// Decides whether `p` is ε-supercritical: `|V| ≥ 2ε⁻³` and
/// `P_{(1-ε)p}(‖K1‖ ≥ ε) ≥ ε`, the latter by a one-sided Wilson test with
/// replicas doubled from 32 up to `max_replicas` while the interval
/// straddles `ε`.
pub fn epsilon_supercritical(g: &Graph, p: f64, epsilon: f64, seed: u64, max_replicas: u64) -> Result<SupercriticalReport> {
    check_probability(p, "p")?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let size_clause = g.n_vertices() as f64 >= 2.0 / (epsilon * epsilon * epsilon);
    if !size_clause {
        return Ok(SupercriticalReport { p, epsilon, size_clause, estimate: None, verdict: Verdict::No });
    }
    let q = (1.0 - epsilon) * p;
    let target = density_target(epsilon, g.n_vertices());
    let key = StreamKey::new(seed).derive(tags::SUPERCRITICAL);
    let (mut hits, mut trials) = (0u64, 0u64);
    let mut next = 32u64.min(max_replicas.max(1));
    loop {
        let start = trials;
        let new = run_replicas(g, next - start, |s, r| s.percolate(g, q, &mut key.rng(start + r)).0 >= target);
        hits += new.iter().filter(|&&h| h).count() as u64;
        trials = next;
        let est = Proportion::with_z(hits, trials, Z95_ONE_SIDED);
        let verdict = if est.lo >= epsilon {
            Some(Verdict::Yes)
        } else if est.hi < epsilon {
            Some(Verdict::No)
        } else if trials >= max_replicas {
            Some(Verdict::Inconclusive)
        } else {
            None
        };
        if let Some(verdict) = verdict {
            return Ok(SupercriticalReport { p, epsilon, size_clause, estimate: Some(est), verdict });
        }
        next = (2 * trials).min(max_replicas);
    }
}

/// The largest `β` such that a fraction at least `ε` of the sampled `‖K1‖`
/// values are `≥ β`, i.e. the `⌈εR⌉`-th largest sample.
pub fn typical_density(g: &Graph, p: f64, epsilon: f64, replicas: u64, seed: u64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("ε must lie in (0, 1], got {epsilon}")));
    }
    if (replicas as f64) < 1.0 / (epsilon * epsilon) {
        return Err(invalid(format!("need at least 1/ε² = {} replicas", (1.0 / (epsilon * epsilon)).ceil())));
    }
    let mut k1: Vec<usize> = simulate(g, p, replicas, seed)?.into_iter().map(|c| c.k1).collect();
    k1.sort_unstable_by(|a, b| b.cmp(a));
    let rank = ((epsilon * replicas as f64).ceil() as usize).clamp(1, k1.len());
    Ok(k1[rank - 1] as f64 / g.n_vertices() as f64)
}

/// `p_c(ε, ε) ≥ 1/(2d)` with `d` the maximum degree, for graphs with
/// `|V| ≥ 2ε⁻³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcLowerBound {
    pub epsilon: f64,
    pub bound: f64,
    pub size_clause: bool,
    pub estimate: Option<ThresholdEstimate>,
    /// The whole bracket lies at or above the bound (vacuous without the
    /// size clause).
    pub holds: bool,
}

pub fn pc_lower_bound_check(g: &Graph, epsilon: f64, tolerance: f64, seed: u64, cfg: &ThresholdConfig) -> Result<PcLowerBound> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let bound = 1.0 / (2.0 * g.max_degree() as f64);
    let size_clause = g.n_vertices() as f64 >= 2.0 / (epsilon * epsilon * epsilon);
    if !size_clause {
        return Ok(PcLowerBound { epsilon, bound, size_clause, estimate: None, holds: true });
    }
    let est = threshold(g, epsilon, epsilon, tolerance, seed, cfg)?;
    Ok(PcLowerBound { epsilon, bound, size_clause, holds: est.p_lo >= bound, estimate: Some(est) })
}
