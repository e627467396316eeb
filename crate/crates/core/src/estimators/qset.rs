use serde::{Deserialize, Serialize};

use super::curve::EmpiricalCurve;
use crate::error::{invalid, Error, Result};
use crate::oracle::{exact_threshold, LevelCounts};

/// Minimum number of grid cells that must meet `I`.
pub const MIN_CELLS_IN_INTERVAL: usize = 16;
/// Half-width, in cells, of the finite-difference stencil (3 cells total).
const STENCIL: (usize, usize) = (1, 2);

/// `I = [p_c(β,δ), p_c(β,1-δ)]` and `Q = {p ∈ I : p f'(p) ≤ bound}`, with
/// `Q` a union of grid cells clipped to `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSet {
    pub beta: f64,
    pub delta: f64,
    pub bound: f64,
    pub interval: (f64, f64),
    pub cells: Vec<(f64, f64)>,
    pub measure: f64,
    /// Number of grid cells meeting `I`.
    pub cells_in_interval: usize,
    /// Derivative used for each cell meeting `I`, with the clipped cell.
    pub derivatives: Vec<((f64, f64), f64)>,
}

impl QSet {
    pub fn interval_measure(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    pub fn contains(&self, p: f64) -> bool {
        self.cells.iter().any(|&(a, b)| a <= p && p <= b)
    }
}

/// First crossing of `level` by the nondecreasing piecewise-linear curve.
fn inverse(grid: &[f64], f: &[f64], level: f64) -> Result<f64> {
    if f[0] > level {
        return Err(invalid(format!("curve starts above {level}; grid does not cover I")));
    }
    let i = f.iter().position(|&v| v >= level).ok_or_else(|| invalid(format!("curve never reaches {level}; grid does not cover I")))?;
    if i == 0 {
        return Ok(grid[0]);
    }
    let (x0, x1, y0, y1) = (grid[i - 1], grid[i], f[i - 1], f[i]);
    Ok(x0 + (x1 - x0) * (level - y0) / (y1 - y0))
}

fn cells_within(
    grid: &[f64],
    interval: (f64, f64),
    bound: f64,
    derivative: impl Fn(usize, (f64, f64)) -> f64,
) -> Result<(Vec<(f64, f64)>, usize, Vec<((f64, f64), f64)>)> {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut derivs = Vec::new();
    let mut count = 0;
    for c in 0..grid.len() - 1 {
        let a = grid[c].max(interval.0);
        let b = grid[c + 1].min(interval.1);
        if b <= a {
            continue;
        }
        count += 1;
        let d = derivative(c, (a, b));
        derivs.push(((a, b), d));
        if 0.5 * (a + b) * d <= bound {
            match cells.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => cells.push((a, b)),
            }
        }
    }
    if count < MIN_CELLS_IN_INTERVAL {
        return Err(Error::Resolution(format!(
            "only {count} grid cells meet I = [{}, {}]; need at least {MIN_CELLS_IN_INTERVAL}",
            interval.0, interval.1
        )));
    }
    Ok((cells, count, derivs))
}

/// Q from a nondecreasing curve sampled on `grid`, with `f'` from centred
/// differences spanning three cells.
pub fn q_set_from_values(grid: &[f64], f_hat: &[f64], beta: f64, delta: f64, bound: f64) -> Result<QSet> {
    if grid.len() != f_hat.len() || grid.len() < 2 {
        return Err(invalid("grid and values must have equal length ≥ 2"));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("δ must lie in (0, 1/2], got {delta}")));
    }
    let interval = (inverse(grid, f_hat, delta)?, inverse(grid, f_hat, 1.0 - delta)?);
    let last = grid.len() - 1;
    let (cells, cells_in_interval, derivatives) = cells_within(grid, interval, bound, |c, _| {
        let a = c.saturating_sub(STENCIL.0);
        let b = (c + STENCIL.1).min(last);
        (f_hat[b] - f_hat[a]) / (grid[b] - grid[a])
    })?;
    let measure = cells.iter().map(|(a, b)| b - a).sum();
    Ok(QSet { beta, delta, bound, interval, cells, measure, cells_in_interval, derivatives })
}

/// `Q = {p ∈ I : p f'(p) ≤ 4/δ}` from an estimated curve.
pub fn q_set_and_interval(curve: &EmpiricalCurve, delta: f64) -> Result<QSet> {
    q_set_from_values(&curve.p_grid, &curve.f_hat, curve.alpha, delta, 4.0 / delta)
}

/// The same construction with the exact polynomial and its exact
/// derivative (evaluated at the clipped cell midpoint).
pub fn q_set_exact(lc: &LevelCounts, beta: f64, delta: f64, grid: &[f64]) -> Result<QSet> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing with at least two points"));
    }
    let interval = (exact_threshold(lc, delta)?, exact_threshold(lc, 1.0 - delta)?);
    let bound = 4.0 / delta;
    let (cells, cells_in_interval, derivatives) =
        cells_within(grid, interval, bound, |_, (a, b)| lc.derivative(&(0.5 * (a + b))))?;
    let measure = cells.iter().map(|(a, b)| b - a).sum();
    Ok(QSet { beta, delta, bound, interval, cells, measure, cells_in_interval, derivatives })
}

/// Markov-inequality check on a curve: if `f⁻¹(1-δ) ≥ (1+ε) f⁻¹(δ)` then
/// `{p ∈ I : p f'(p) ≤ 4/ε}` has at least half the measure of `I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovCheck {
    pub epsilon: f64,
    /// Largest `ε` for which the hypothesis holds.
    pub epsilon_star: f64,
    pub hypothesis: bool,
    pub measure: f64,
    pub interval_measure: f64,
    /// Conclusion holds, or the hypothesis fails.
    pub holds: bool,
}

pub fn markov_check(grid: &[f64], f_hat: &[f64], delta: f64, epsilon: f64) -> Result<MarkovCheck> {
    if !(epsilon > 0.0) {
        return Err(invalid("ε must be positive"));
    }
    let q = q_set_from_values(grid, f_hat, f64::NAN, delta, 4.0 / epsilon)?;
    let (lo, hi) = q.interval;
    let epsilon_star = if lo > 0.0 { hi / lo - 1.0 } else { f64::INFINITY };
    let hypothesis = epsilon <= epsilon_star;
    let interval_measure = q.interval_measure();
    let holds = !hypothesis || q.measure >= 0.5 * interval_measure;
    Ok(MarkovCheck { epsilon, epsilon_star, hypothesis, measure: q.measure, interval_measure, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Vec<f64> {
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn linear_curve_gives_q_equal_to_i() {
        let g = grid(200);
        let q = q_set_from_values(&g, &g, 1.0, 0.1, 40.0).unwrap();
        assert!((q.interval.0 - 0.1).abs() < 1e-12 && (q.interval.1 - 0.9).abs() < 1e-12);
        assert!((q.measure - 0.8).abs() < 1e-12);
        assert_eq!(q.cells.len(), 1);
    }

    #[test]
    fn steep_region_is_excluded() {
        // f jumps from 0.1 to 0.9 over [0.5, 0.51]; p f' ≈ 40 there.
        let g = grid(1000);
        let f: Vec<f64> = g
            .iter()
            .map(|&p| {
                if p < 0.5 {
                    0.2 * p
                } else if p < 0.51 {
                    0.1 + 80.0 * (p - 0.5)
                } else {
                    0.9 + 0.1 * (p - 0.51) / 0.49
                }
            })
            .collect();
        let q = q_set_from_values(&g, &f, 0.5, 0.05, 20.0).unwrap();
        assert!(q.contains(0.3) && q.contains(0.7));
        assert!(!q.contains(0.505));
        assert!(q.measure < q.interval_measure() - 0.005);
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        let g = grid(10);
        assert!(matches!(q_set_from_values(&g, &g, 1.0, 0.1, 40.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn markov_check_on_linear_curve() {
        let g = grid(400);
        let m = markov_check(&g, &g, 0.1, 1.0).unwrap();
        assert!(m.hypothesis && m.holds);
        assert!((m.epsilon_star - 8.0).abs() < 1e-9);
    }
}
