use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graphs::Graph;
use crate::percolation::{check_probability, k1_hitting_time, run_replicas};
use crate::rng::{open_unit, tags, StreamKey};
use crate::stats::{isotonic_nondecreasing, BinomialWeights, MeanEstimate, Proportion, UpperTails, Z95};

/// Smallest cluster size `k` with `k/|V| ≥ alpha`.
pub fn density_target(alpha: f64, n_vertices: usize) -> usize {
    let exact = alpha * n_vertices as f64;
    let k = exact.ceil() as usize;
    // Guard against `alpha = k/n` landing a hair above `k/n`.
    if k > 0 && ((k - 1) as f64 - exact).abs() < 1e-9 * exact.max(1.0) {
        k - 1
    } else {
        k
    }
    .max(1)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("α must lie in (0, 1], got {alpha}")))
    }
}

/// Hitting times of `|K1| ≥ target` along independent uniform edge orders.
///
/// Since `{|K1| ≥ target}` is increasing, it holds after `m` insertions iff
/// `m ≥ m*`, so each sweep reduces to its hitting time `m*`, and
/// `P_p(‖K1‖ ≥ α) = E[P(Binomial(|E|, p) ≥ m*)]`.
#[derive(Debug, Clone)]
pub struct HittingPool {
    pub target: usize,
    pub m_edges: usize,
    /// Hitting time of replica `r`.
    pub times: Vec<u32>,
    histogram: BTreeMap<u32, u64>,
    key: StreamKey,
}

impl HittingPool {
    pub fn new(g: &Graph, alpha: f64, seed: u64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(HittingPool {
            target: density_target(alpha, g.n_vertices()),
            m_edges: g.n_edges(),
            times: Vec::new(),
            histogram: BTreeMap::new(),
            key: StreamKey::new(seed).derive(tags::SWEEP),
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Extends the pool to `replicas` sweeps; replica `r` always uses
    /// stream `r`, so a pool grown in steps equals one built at once.
    pub fn grow_to(&mut self, g: &Graph, replicas: usize) {
        let start = self.times.len() as u64;
        if replicas as u64 <= start {
            return;
        }
        let target = self.target;
        let key = self.key;
        let new = run_replicas(g, replicas as u64 - start, |s, i| {
            k1_hitting_time(g, s, &mut key.rng(start + i), target) as u32
        });
        for &t in &new {
            *self.histogram.entry(t).or_insert(0) += 1;
        }
        self.times.extend(new);
    }

    /// Rao–Blackwellised estimate of `P_p(‖K1‖ ≥ α)` with a normal interval
    /// at quantile `z`.
    pub fn estimate(&self, p: f64, z: f64) -> MeanEstimate {
        let r = self.times.len();
        if r == 0 {
            return MeanEstimate::from_samples(&[]);
        }
        let tails = UpperTails::new(&BinomialWeights::new(self.m_edges, p));
        let mean = self.histogram.iter().map(|(&t, &c)| c as f64 * tails.get(t as usize)).sum::<f64>() / r as f64;
        let var = if r > 1 {
            self.histogram
                .iter()
                .map(|(&t, &c)| {
                    let d = tails.get(t as usize) - mean;
                    c as f64 * d * d
                })
                .sum::<f64>()
                / (r - 1) as f64
        } else {
            0.0
        };
        let std_error = (var / r as f64).sqrt();
        MeanEstimate { mean, std_error, n: r as u64, lo: mean - z * std_error, hi: mean + z * std_error }
    }

    /// Point estimate only.
    pub fn mean(&self, p: f64) -> f64 {
        self.estimate(p, 0.0).mean
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMethod {
    /// Independent Bernoulli replicas at every grid point.
    Direct,
    /// One pool of sweeps serving all grid points: replica `r` draws a single
    /// uniform `U_r`, and `N_r(p)` is the `U_r`-quantile of Binomial(|E|, p),
    /// so every grid point sees a genuine Binomial(`R`, f(p)) count while the
    /// curve is coupled (monotone) across points.
    SweepPool,
}

/// `f(p) = P_p(‖K1‖ ≥ α)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCurve {
    pub alpha: f64,
    pub p_grid: Vec<f64>,
    /// Per-point `(successes, trials)`.
    pub raw: Vec<(u64, u64)>,
    /// Trial-weighted isotonic regression of the raw frequencies.
    pub f_hat: Vec<f64>,
    /// Wilson bounds, widened if necessary to contain `f_hat`.
    pub ci_lo: Vec<f64>,
    pub ci_hi: Vec<f64>,
    pub method: CurveMethod,
    pub seed: u64,
}

fn check_grid(p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return Err(invalid("p grid is empty"));
    }
    for &p in p_grid {
        check_probability(p, "grid point")?;
    }
    if p_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("p grid must be strictly increasing"));
    }
    Ok(())
}

impl EmpiricalCurve {
    pub fn from_counts(alpha: f64, p_grid: Vec<f64>, raw: Vec<(u64, u64)>, method: CurveMethod, seed: u64) -> Result<Self> {
        check_grid(&p_grid)?;
        if raw.len() != p_grid.len() || raw.iter().any(|&(k, n)| n == 0 || k > n) {
            return Err(invalid("need successes ≤ trials and trials > 0 at every grid point"));
        }
        let freq: Vec<f64> = raw.iter().map(|&(k, n)| k as f64 / n as f64).collect();
        let weights: Vec<f64> = raw.iter().map(|&(_, n)| n as f64).collect();
        let f_hat = isotonic_nondecreasing(&freq, &weights);
        let mut ci_lo = Vec::with_capacity(raw.len());
        let mut ci_hi = Vec::with_capacity(raw.len());
        for (&(k, n), &f) in raw.iter().zip(&f_hat) {
            let w = Proportion::from_counts(k, n);
            // Projection property: pooling never leaves the interval by more
            // than its own width.
            let width = w.hi - w.lo;
            debug_assert!(f >= w.lo - width - 1e-12 && f <= w.hi + width + 1e-12);
            ci_lo.push(w.lo.min(f));
            ci_hi.push(w.hi.max(f));
        }
        Ok(EmpiricalCurve { alpha, p_grid, raw, f_hat, ci_lo, ci_hi, method, seed })
    }

    /// Linear interpolation of `f_hat`, clamped to the end values outside the
    /// grid.
    pub fn value(&self, p: f64) -> f64 {
        interpolate(&self.p_grid, &self.f_hat, p)
    }

    /// Largest interval half-width, used as slack by downstream checks.
    pub fn max_ci_width(&self) -> f64 {
        self.ci_lo.iter().zip(&self.ci_hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }

    /// CSV body with columns `p,trials,successes,f_hat,ci_lo,ci_hi`.
    pub fn to_csv_rows(&self) -> Vec<String> {
        let mut rows = vec!["p,trials,successes,f_hat,ci_lo,ci_hi".to_string()];
        for i in 0..self.p_grid.len() {
            rows.push(format!(
                "{},{},{},{},{},{}",
                self.p_grid[i], self.raw[i].1, self.raw[i].0, self.f_hat[i], self.ci_lo[i], self.ci_hi[i]
            ));
        }
        rows
    }
}

pub(crate) fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&g| g <= x);
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Estimates `f(p) = P_p(‖K1‖ ≥ α)` at every grid point.
pub fn estimate_curve(
    g: &Graph,
    alpha: f64,
    p_grid: &[f64],
    replicas_per_point: u64,
    seed: u64,
    method: CurveMethod,
) -> Result<EmpiricalCurve> {
    check_alpha(alpha)?;
    check_grid(p_grid)?;
    if replicas_per_point == 0 {
        return Err(invalid("replicas per point must be positive"));
    }
    let target = density_target(alpha, g.n_vertices());
    let raw: Vec<(u64, u64)> = match method {
        CurveMethod::Direct => {
            let base = StreamKey::new(seed).derive(tags::CURVE);
            p_grid
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    let key = base.derive(i as u64);
                    let hits = run_replicas(g, replicas_per_point, |s, r| s.percolate(g, p, &mut key.rng(r)).0 >= target);
                    (hits.iter().filter(|&&h| h).count() as u64, replicas_per_point)
                })
                .collect()
        }
        CurveMethod::SweepPool => {
            let mut pool = HittingPool::new(g, alpha, seed)?;
            pool.grow_to(g, replicas_per_point as usize);
            let ukey = StreamKey::new(seed).derive(tags::BINOMIAL);
            // 1 - U_r, uniform on [0, 1).
            let v: Vec<f64> = (0..replicas_per_point).map(|r| 1.0 - open_unit(&mut ukey.rng(r))).collect();
            p_grid
                .iter()
                .map(|&p| {
                    let tails = UpperTails::new(&BinomialWeights::new(g.n_edges(), p));
                    // N_r(p) ≥ m*_r  ⇔  P(N ≥ m*_r) > 1 - U_r.
                    let hits = pool.times.iter().zip(&v).filter(|&(&t, &v)| v < tails.get(t as usize)).count();
                    (hits as u64, replicas_per_point)
                })
                .collect()
        }
    };
    EmpiricalCurve::from_counts(alpha, p_grid.to_vec(), raw, method, seed)
}

/// `MeanEstimate` at the default 95% level, from the pool.
pub fn pool_estimate(pool: &HittingPool, p: f64) -> MeanEstimate {
    pool.estimate(p, Z95)
}
