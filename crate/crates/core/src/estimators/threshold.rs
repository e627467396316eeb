use serde::{Deserialize, Serialize};

use super::curve::{check_alpha, density_target, HittingPool};
use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::percolation::run_replicas;
use crate::rng::{tags, StreamKey};
use crate::stats::Proportion;

/// Two-sided 99% normal quantile, the default decision level of a probe.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMethod {
    /// Fresh Bernoulli replicas at each probe, Wilson intervals.
    Direct,
    /// A shared pool of sweep hitting times, evaluated at any `p` by
    /// binomial mixing.
    SweepPool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub method: ProbeMethod,
    /// Normal quantile of the interval that must exclude `δ`.
    pub z: f64,
    pub initial_replicas: u64,
    /// Replica budget per probe (direct) or for the whole pool.
    pub max_replicas: u64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig { method: ProbeMethod::SweepPool, z: Z99, initial_replicas: 1 << 12, max_replicas: 1 << 18 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub alpha: f64,
    pub delta: f64,
    pub p_hat: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub replicas_used: u64,
    pub probes: u32,
    /// The budget ran out with a straddling interval before the bracket
    /// reached the tolerance.
    pub inconclusive: bool,
}

#[derive(Debug, Clone, Copy)]
enum Side {
    Below,
    Above,
    Straddle,
}

struct Interval {
    estimate: f64,
    lo: f64,
    hi: f64,
}

trait Probe {
    fn interval(&mut self, p: f64) -> Interval;
    /// Enlarges the sample behind the probe at `p`; false once the budget is
    /// spent.
    fn grow(&mut self, p: f64) -> bool;
    fn replicas_used(&self) -> u64;

    fn side(&mut self, p: f64, delta: f64) -> Side {
        loop {
            let iv = self.interval(p);
            if iv.hi < delta {
                return Side::Below;
            }
            if iv.lo > delta {
                return Side::Above;
            }
            if !self.grow(p) {
                return Side::Straddle;
            }
        }
    }

    /// Point estimate of the root inside `[lo, hi]`.
    fn point(&mut self, lo: f64, hi: f64, _delta: f64) -> f64 {
        0.5 * (lo + hi)
    }
}

struct DirectProbe<'g> {
    g: &'g Graph,
    target: usize,
    key: StreamKey,
    cfg: ThresholdConfig,
    counts: Vec<(u64, u64, u64)>, // (p bits, successes, trials)
    used: u64,
}

impl DirectProbe<'_> {
    fn entry(&mut self, p: f64) -> usize {
        let bits = p.to_bits();
        if let Some(i) = self.counts.iter().position(|c| c.0 == bits) {
            return i;
        }
        self.counts.push((bits, 0, 0));
        let i = self.counts.len() - 1;
        self.extend(i, self.cfg.initial_replicas);
        i
    }

    fn extend(&mut self, i: usize, to: u64) {
        let (bits, _, have) = self.counts[i];
        if to <= have {
            return;
        }
        let p = f64::from_bits(bits);
        let key = self.key.derive(bits);
        let (g, target) = (self.g, self.target);
        let hits = run_replicas(g, to - have, |s, r| s.percolate(g, p, &mut key.rng(have + r)).0 >= target);
        self.counts[i].1 += hits.iter().filter(|&&h| h).count() as u64;
        self.counts[i].2 = to;
        self.used += to - have;
    }
}

impl Probe for DirectProbe<'_> {
    fn interval(&mut self, p: f64) -> Interval {
        let i = self.entry(p);
        let (_, k, n) = self.counts[i];
        let w = Proportion::with_z(k, n, self.cfg.z);
        Interval { estimate: w.estimate, lo: w.lo, hi: w.hi }
    }

    fn grow(&mut self, p: f64) -> bool {
        let i = self.entry(p);
        let have = self.counts[i].2;
        if have >= self.cfg.max_replicas {
            return false;
        }
        self.extend(i, (2 * have).min(self.cfg.max_replicas));
        true
    }

    fn replicas_used(&self) -> u64 {
        self.used
    }
}

struct PoolProbe<'a> {
    g: &'a Graph,
    pool: &'a mut HittingPool,
    cfg: ThresholdConfig,
}

impl Probe for PoolProbe<'_> {
    fn interval(&mut self, p: f64) -> Interval {
        if self.pool.is_empty() {
            self.pool.grow_to(self.g, self.cfg.initial_replicas as usize);
        }
        let e = self.pool.estimate(p, self.cfg.z);
        Interval { estimate: e.mean, lo: e.lo, hi: e.hi }
    }

    fn grow(&mut self, _p: f64) -> bool {
        let have = self.pool.len() as u64;
        if have >= self.cfg.max_replicas {
            return false;
        }
        self.pool.grow_to(self.g, (2 * have).min(self.cfg.max_replicas) as usize);
        true
    }

    fn replicas_used(&self) -> u64 {
        self.pool.len() as u64
    }

    /// The pooled estimate is continuous and nondecreasing in `p`, so its
    /// `δ`-crossing is found by plain bisection.
    fn point(&mut self, lo: f64, hi: f64, delta: f64) -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if self.interval(mid).estimate >= delta {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    }
}

fn bisect(probe: &mut dyn Probe, alpha: f64, delta: f64, tolerance: f64) -> ThresholdEstimate {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut probes = 0u32;
    let mut inconclusive = false;
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        match probe.side(mid, delta) {
            Side::Below => lo = mid,
            Side::Above => hi = mid,
            Side::Straddle => {
                // The root is close to `mid`: try to shave the outer halves.
                let (left, right) = (0.5 * (lo + mid), 0.5 * (mid + hi));
                probes += 2;
                let moved_lo = matches!(probe.side(left, delta), Side::Below);
                let moved_hi = matches!(probe.side(right, delta), Side::Above);
                if moved_lo {
                    lo = left;
                }
                if moved_hi {
                    hi = right;
                }
                if !moved_lo && !moved_hi {
                    inconclusive = true;
                    break;
                }
            }
        }
    }
    let p_hat = probe.point(lo, hi, delta).clamp(lo, hi);
    ThresholdEstimate { alpha, delta, p_hat, p_lo: lo, p_hi: hi, replicas_used: probe.replicas_used(), probes, inconclusive }
}

fn check_threshold_args(g: &Graph, alpha: f64, delta: f64, tolerance: f64) -> Result<()> {
    check_alpha(alpha)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(tolerance > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    // `‖K1‖ ≥ α` holds already in the empty configuration.
    if density_target(alpha, g.n_vertices()) <= 1 {
        return Err(Error::NoThreshold);
    }
    Ok(())
}

/// Stochastic bisection for `p_c(α, δ)`: each probe is sampled until its
/// interval excludes `δ` or the budget is spent.
pub fn threshold(
    g: &Graph,
    alpha: f64,
    delta: f64,
    tolerance: f64,
    seed: u64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdEstimate> {
    check_threshold_args(g, alpha, delta, tolerance)?;
    match cfg.method {
        ProbeMethod::Direct => {
            let mut probe = DirectProbe {
                g,
                target: density_target(alpha, g.n_vertices()),
                key: StreamKey::new(seed).derive(tags::THRESHOLD),
                cfg: *cfg,
                counts: Vec::new(),
                used: 0,
            };
            Ok(bisect(&mut probe, alpha, delta, tolerance))
        }
        ProbeMethod::SweepPool => {
            let mut pool = HittingPool::new(g, alpha, seed)?;
            threshold_from_pool(g, &mut pool, alpha, delta, tolerance, cfg)
        }
    }
}

/// Threshold search on an existing (and possibly growing) pool.
pub fn threshold_from_pool(
    g: &Graph,
    pool: &mut HittingPool,
    alpha: f64,
    delta: f64,
    tolerance: f64,
    cfg: &ThresholdConfig,
) -> Result<ThresholdEstimate> {
    check_threshold_args(g, alpha, delta, tolerance)?;
    let mut probe = PoolProbe { g, pool, cfg: *cfg };
    Ok(bisect(&mut probe, alpha, delta, tolerance))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpRatio {
    pub beta: f64,
    pub delta: f64,
    pub lower: ThresholdEstimate,
    pub upper: ThresholdEstimate,
    /// `p̂_c(β, 1-δ) / p̂_c(β, δ)`.
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub inconclusive: bool,
}

/// `p_c(β, 1-δ) / p_c(β, δ)`, both thresholds drawn from one sweep pool
/// (or two independent direct searches).
pub fn sharp_density_ratio(
    g: &Graph,
    beta: f64,
    delta: f64,
    tolerance: f64,
    seed: u64,
    cfg: &ThresholdConfig,
) -> Result<SharpRatio> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("δ must lie in (0, 1/2], got {delta}")));
    }
    let (lower, upper) = match cfg.method {
        ProbeMethod::SweepPool => {
            let mut pool = HittingPool::new(g, beta, seed)?;
            let lower = threshold_from_pool(g, &mut pool, beta, delta, tolerance, cfg)?;
            let upper = threshold_from_pool(g, &mut pool, beta, 1.0 - delta, tolerance, cfg)?;
            // Re-evaluate the first point on the final pool so both ends use
            // the same sample.
            let lower = if pool.len() as u64 > lower.replicas_used {
                threshold_from_pool(g, &mut pool, beta, delta, tolerance, cfg)?
            } else {
                lower
            };
            (lower, upper)
        }
        ProbeMethod::Direct => {
            let lower = threshold(g, beta, delta, tolerance, seed, cfg)?;
            let upper = threshold(g, beta, 1.0 - delta, tolerance, seed ^ 0x5bd1_e995, cfg)?;
            (lower, upper)
        }
    };
    Ok(SharpRatio {
        beta,
        delta,
        ratio: upper.p_hat / lower.p_hat,
        ratio_lo: upper.p_lo / lower.p_hi,
        ratio_hi: if lower.p_lo > 0.0 { upper.p_hi / lower.p_lo } else { f64::INFINITY },
        inconclusive: lower.inconclusive || upper.inconclusive,
        lower,
        upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, FamilyTag};

    fn single_edge() -> Graph {
        Graph::from_edges(2, vec![(0, 1)], None, true, FamilyTag::new("edge", serde_json::json!({}))).unwrap()
    }

    #[test]
    fn single_edge_threshold() {
        let g = single_edge();
        for method in [ProbeMethod::Direct, ProbeMethod::SweepPool] {
            let cfg = ThresholdConfig { method, ..Default::default() };
            let t = threshold(&g, 1.0, 0.3, 0.01, 1, &cfg).unwrap();
            assert!(t.p_lo <= t.p_hat && t.p_hat <= t.p_hi);
            assert!(t.p_lo - 0.01 <= 0.3 && 0.3 <= t.p_hi + 0.01, "{method:?} {t:?}");
        }
    }

    #[test]
    fn c4_threshold_is_one_half() {
        let g = cycle(4).unwrap();
        let cfg = ThresholdConfig::default();
        let t = threshold(&g, 0.75, 9.0 / 16.0, 0.005, 2, &cfg).unwrap();
        assert!(t.p_lo - 0.005 <= 0.5 && 0.5 <= t.p_hi + 0.005, "{t:?}");
        assert!((t.p_hat - 0.5).abs() < 0.02);
    }

    #[test]
    fn complete_1000_median_threshold() {
        let g = complete(1000).unwrap();
        let cfg = ThresholdConfig::default();
        let t = threshold(&g, 0.5, 0.5, 1e-5, 3, &cfg).unwrap();
        let c = t.p_hat * 1000.0;
        assert!((1.15..=1.45).contains(&c), "{t:?}");
    }

    #[test]
    fn trivial_alpha_has_no_threshold() {
        let g = cycle(5).unwrap();
        assert_eq!(threshold(&g, 0.2, 0.5, 0.01, 1, &ThresholdConfig::default()), Err(Error::NoThreshold));
    }

    #[test]
    fn ratio_is_at_least_one() {
        let g = complete(60).unwrap();
        let r = sharp_density_ratio(&g, 0.5, 0.1, 1e-4, 4, &ThresholdConfig::default()).unwrap();
        assert!(r.ratio >= 1.0 && r.ratio_lo <= r.ratio && r.ratio <= r.ratio_hi, "{r:?}");
    }

    #[test]
    fn tiny_budget_can_be_inconclusive() {
        let g = complete(30).unwrap();
        let cfg = ThresholdConfig { method: ProbeMethod::Direct, z: Z99, initial_replicas: 20, max_replicas: 40 };
        let t = threshold(&g, 0.5, 0.5, 1e-9, 5, &cfg).unwrap();
        assert!(t.inconclusive);
        assert!(t.p_lo <= t.p_hat && t.p_hat <= t.p_hi);
    }
}
