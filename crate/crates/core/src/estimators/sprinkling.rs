use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Absolute slack for the spacing and increment invariants.
pub const SEQUENCE_SLACK: f64 = 1e-12;

/// Parameters `p_0 < p_1 < …` in `Q` with `p_{n+1} - p_n ≥ 3^{-(n+1)} 𝓛(Q)`
/// and `f(p_{n+1}) - f(p_n) ≤ 2^{-n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprinklingSequence {
    pub q_set_measure: f64,
    /// Pre-images in `[0, 1]` under the measure-preserving map.
    pub x_seq: Vec<f64>,
    pub p_seq: Vec<f64>,
    pub f_at_p: Vec<f64>,
}

impl SprinklingSequence {
    /// Re-checks both invariants, optionally with extra slack on the
    /// increments (e.g. a curve's interval width).
    pub fn check(&self, f_slack: f64) -> Result<()> {
        for n in 0..self.p_seq.len().saturating_sub(1) {
            let gap = self.p_seq[n + 1] - self.p_seq[n];
            let need = 3f64.powi(-(n as i32 + 1)) * self.q_set_measure;
            if gap < need * (1.0 - 1e-9) - SEQUENCE_SLACK {
                return Err(Error::ContractViolation(format!("p gap {gap} < {need} at n = {n}")));
            }
            let df = self.f_at_p[n + 1] - self.f_at_p[n];
            let allow = 2f64.powi(-(n as i32));
            if df > allow + f_slack + SEQUENCE_SLACK {
                return Err(Error::ContractViolation(format!("f increment {df} > {allow} at n = {n}")));
            }
        }
        Ok(())
    }
}

/// Increasing map `φ: [0,1] → X` with `𝓛([0, φ(x)] ∩ X) = x 𝓛(X)`, for `X`
/// a finite union of closed intervals.
#[derive(Debug, Clone)]
pub struct MeasureMap {
    cells: Vec<(f64, f64)>,
    measure: f64,
}

impl MeasureMap {
    pub fn new(cells: &[(f64, f64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = cells.to_vec();
        if sorted.iter().any(|&(a, b)| !(a <= b)) {
            return Err(invalid("cells must satisfy a ≤ b"));
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (a, b) in sorted {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        let measure: f64 = merged.iter().map(|(a, b)| b - a).sum();
        if merged.is_empty() || measure <= 0.0 {
            return Err(invalid("Q must have positive measure"));
        }
        Ok(MeasureMap { cells: merged, measure })
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn phi(&self, x: f64) -> f64 {
        let mut s = x.clamp(0.0, 1.0) * self.measure;
        for &(a, b) in &self.cells {
            let len = b - a;
            if s <= len {
                return a + s;
            }
            s -= len;
        }
        self.cells.last().unwrap().1
    }
}

/// Recursive trisection on `f ∘ φ`: from `x_n`, with
/// `x_{n,i} = x_n + i·3^{-(n+1)}`, step to `x_{n,1}` when
/// `f(x_{n,2}) - f(x_{n,1}) ≤ f(x_{n,3}) - f(x_{n,2})` and to `x_{n,2}`
/// otherwise. Returns `count` terms.
pub fn sprinkling_sequence(f: &dyn Fn(f64) -> f64, q_cells: &[(f64, f64)], count: usize) -> Result<SprinklingSequence> {
    if count == 0 {
        return Err(invalid("count must be positive"));
    }
    let map = MeasureMap::new(q_cells)?;
    let scale = map.cells.last().unwrap().1.abs().max(1.0);
    let finest = 3f64.powi(-(count as i32)) * map.measure;
    if finest < 16.0 * f64::EPSILON * scale {
        return Err(Error::Resolution(format!(
            "{count} terms need spacing 3^-{count}·𝓛(Q) = {finest:e}, below floating-point resolution"
        )));
    }
    let fx = |x: f64| f(map.phi(x));
    let mut x = 0.0f64;
    let mut x_seq = vec![x];
    for n in 0..count - 1 {
        let h = 3f64.powi(-(n as i32 + 1));
        let (f1, f2, f3) = (fx(x + h), fx(x + 2.0 * h), fx((x + 3.0 * h).min(1.0)));
        x = if f2 - f1 <= f3 - f2 + SEQUENCE_SLACK { x + h } else { x + 2.0 * h };
        x_seq.push(x);
    }
    let p_seq: Vec<f64> = x_seq.iter().map(|&x| map.phi(x)).collect();
    let f_at_p: Vec<f64> = p_seq.iter().map(|&p| f(p)).collect();
    let seq = SprinklingSequence { q_set_measure: map.measure, x_seq, p_seq, f_at_p };
    seq.check(0.0)?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_on_unit_interval_always_takes_first_branch() {
        let seq = sprinkling_sequence(&|p| p, &[(0.0, 1.0)], 12).unwrap();
        for n in 0..11 {
            let gap = seq.p_seq[n + 1] - seq.p_seq[n];
            assert!((gap - 3f64.powi(-(n as i32 + 1))).abs() < 1e-15, "n={n}");
        }
    }

    #[test]
    fn two_interval_set() {
        let cells = [(0.0, 0.25), (0.75, 1.0)];
        let map = MeasureMap::new(&cells).unwrap();
        assert_eq!(map.measure(), 0.5);
        assert_eq!(map.phi(0.25), 0.125);
        assert_eq!(map.phi(0.75), 0.875);
        let seq = sprinkling_sequence(&|p| p, &cells, 15).unwrap();
        assert_eq!(seq.q_set_measure, 0.5);
        assert!(seq.p_seq.iter().all(|&p| p <= 0.25 || p >= 0.75));
        seq.check(0.0).unwrap();
    }

    #[test]
    fn step_function_prefers_flat_side() {
        // A jump at 0.6: the sequence must avoid straddling it with a big
        // increment late in the sequence.
        let f = |p: f64| if p < 0.6 { 0.1 * p } else { 0.9 + 0.1 * p };
        let seq = sprinkling_sequence(&f, &[(0.0, 1.0)], 20).unwrap();
        seq.check(0.0).unwrap();
    }

    #[test]
    fn too_many_terms_is_a_resolution_error() {
        assert!(matches!(sprinkling_sequence(&|p| p, &[(0.0, 1.0)], 40), Err(Error::Resolution(_))));
    }
}
