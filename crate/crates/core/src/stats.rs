//! Small statistical kernels: Wilson score intervals, pool-adjacent-violators
//! isotonic regression, binomial mixing weights and mean intervals.

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::scalar::neumaier_sum;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Proportion estimate with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        Self::with_z(successes, trials, Z95)
    }

    pub fn with_z(successes: u64, trials: u64, z: f64) -> Self {
        let (lo, hi) = wilson(successes, trials, z);
        let estimate = if trials == 0 {
            0.5
        } else {
            successes as f64 / trials as f64
        };
        Proportion {
            successes,
            trials,
            estimate,
            lo,
            hi,
        }
    }

    /// Standard error of the plain estimate.
    pub fn std_error(&self) -> f64 {
        if self.trials == 0 {
            return 0.5;
        }
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }

    /// Whether `value` lies in the interval stretched `factor` times about the
    /// point estimate.
    pub fn covers_scaled(&self, value: f64, factor: f64) -> bool {
        let lo = self.estimate - factor * (self.estimate - self.lo);
        let hi = self.estimate + factor * (self.hi - self.estimate);
        lo - 1e-12 <= value && value <= hi + 1e-12
    }
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
/// With no trials the interval is the whole unit interval.
pub fn wilson<T: Float>(successes: u64, trials: u64, z: T) -> (T, T) {
    if trials == 0 {
        return (T::zero(), T::one());
    }
    let n = T::from(trials).unwrap();
    let phat = T::from(successes).unwrap() / n;
    let two = T::one() + T::one();
    let four = two + two;
    let z2 = z * z;
    let denom = T::one() + z2 / n;
    let centre = (phat + z2 / (two * n)) / denom;
    let half = z * (phat * (T::one() - phat) / n + z2 / (four * n * n)).sqrt() / denom;
    let lo = (centre - half).max(T::zero());
    let hi = (centre + half).min(T::one());
    // Exact endpoints at the boundary counts.
    let lo = if successes == 0 { T::zero() } else { lo };
    let hi = if successes == trials { T::one() } else { hi };
    (lo, hi)
}

/// Weighted isotonic (nondecreasing) regression by pool-adjacent-violators.
pub fn isotonic_nondecreasing<T: Float>(values: &[T], weights: &[T]) -> Vec<T> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (weighted mean, total weight, length).
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let w = if w > T::zero() { w } else { T::epsilon() };
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let n = blocks.len();
            if blocks[n - 2].0 <= blocks[n - 1].0 {
                break;
            }
            let (m2, w2, l2) = blocks.pop().unwrap();
            let (m1, w1, l1) = blocks.pop().unwrap();
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, l1 + l2));
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (m, _, len) in blocks {
        out.extend(std::iter::repeat_n(m, len));
    }
    out
}

/// Probabilities of Binomial(n, p) on the window of indices carrying
/// non-negligible mass, computed by the ratio recurrence away from the mode.
#[derive(Debug, Clone)]
pub struct BinomialWeights<T> {
    pub n: usize,
    /// First index of `weights`.
    pub start: usize,
    pub weights: Vec<T>,
}

impl<T: Float> BinomialWeights<T> {
    pub fn new(n: usize, p: T) -> Self {
        let zero = T::zero();
        let one = T::one();
        if p <= zero {
            return BinomialWeights { n, start: 0, weights: vec![one] };
        }
        if p >= one {
            return BinomialWeights { n, start: n, weights: vec![one] };
        }
        let nf = T::from(n).unwrap();
        let mode = ((nf + one) * p).floor().to_usize().unwrap_or(0).min(n);
        let odds = p / (one - p);
        let cutoff = T::from(1e-20).unwrap();

        let mut up = Vec::new();
        let mut w = one;
        let mut k = mode;
        while k < n {
            w = w * T::from(n - k).unwrap() / T::from(k + 1).unwrap() * odds;
            if w < cutoff {
                break;
            }
            up.push(w);
            k += 1;
        }
        let mut down = Vec::new();
        let mut w = one;
        let mut k = mode;
        while k > 0 {
            w = w * T::from(k).unwrap() / T::from(n - k + 1).unwrap() / odds;
            if w < cutoff {
                break;
            }
            down.push(w);
            k -= 1;
        }
        let start = mode - down.len();
        let mut weights: Vec<T> = down.into_iter().rev().collect();
        weights.push(one);
        weights.extend(up);
        let total = neumaier_sum(weights.iter().copied());
        for x in &mut weights {
            *x = *x / total;
        }
        BinomialWeights { n, start, weights }
    }

    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }

    /// Weight of index `k` (zero outside the window).
    pub fn weight(&self, k: usize) -> T {
        if k < self.start || k >= self.end() {
            T::zero()
        } else {
            self.weights[k - self.start]
        }
    }

    /// `Σ_k w_k · stat[k]`; `stat` must have length `n + 1`.
    pub fn mix(&self, stat: &[T]) -> T {
        debug_assert_eq!(stat.len(), self.n + 1);
        neumaier_sum(
            self.weights
                .iter()
                .zip(&stat[self.start..self.end()])
                .map(|(&w, &s)| w * s),
        )
    }

    /// Upper tail `P(N ≥ k)`.
    pub fn tail(&self, k: usize) -> T {
        if k <= self.start {
            return T::one();
        }
        if k >= self.end() {
            return T::zero();
        }
        neumaier_sum(self.weights[k - self.start..].iter().copied()).min(T::one())
    }
}

/// Precomputed upper tails `P(N ≥ k)` of a [`BinomialWeights`] window, for
/// many lookups at one `p`.
#[derive(Debug, Clone)]
pub struct UpperTails<T> {
    start: usize,
    tails: Vec<T>,
}

impl<T: Float> UpperTails<T> {
    pub fn new(w: &BinomialWeights<T>) -> Self {
        let mut tails = vec![T::zero(); w.weights.len()];
        // Compensated suffix sums.
        let (mut sum, mut comp) = (T::zero(), T::zero());
        for i in (0..w.weights.len()).rev() {
            let x = w.weights[i];
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp = comp + ((sum - t) + x);
            } else {
                comp = comp + ((x - t) + sum);
            }
            sum = t;
            tails[i] = (sum + comp).min(T::one());
        }
        UpperTails { start: w.start, tails }
    }

    pub fn get(&self, k: usize) -> T {
        if k <= self.start {
            T::one()
        } else if k - self.start >= self.tails.len() {
            T::zero()
        } else {
            self.tails[k - self.start]
        }
    }
}

/// Sample mean with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
    pub lo: f64,
    pub hi: f64,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        Self::from_samples_with_z(samples, Z95)
    }

    pub fn from_samples_with_z(samples: &[f64], z: f64) -> Self {
        let n = samples.len();
        if n == 0 {
            return MeanEstimate { mean: f64::NAN, std_error: f64::INFINITY, n: 0, lo: f64::NEG_INFINITY, hi: f64::INFINITY };
        }
        let mean = neumaier_sum(samples.iter().copied()) / n as f64;
        let var = if n > 1 {
            neumaier_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64
        } else {
            0.0
        };
        let std_error = (var / n as f64).sqrt();
        MeanEstimate {
            mean,
            std_error,
            n: n as u64,
            lo: mean - z * std_error,
            hi: mean + z * std_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_reference_values() {
        // 5/10 at 95%: centre 0.5, half-width 0.2634 (standard table value).
        let (lo, hi) = wilson(5, 10, Z95);
        assert!((lo - 0.2366).abs() < 1e-4, "{lo}");
        assert!((hi - 0.7634).abs() < 1e-4, "{hi}");
        let (lo, hi) = wilson(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2775).abs() < 1e-4, "{hi}");
        assert_eq!(wilson(3, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn pava_pools_violators() {
        let fitted = isotonic_nondecreasing(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]);
        assert_eq!(fitted, vec![1.0, 2.5, 2.5, 4.0]);
        let fitted = isotonic_nondecreasing(&[3.0, 1.0], &[3.0, 1.0]);
        assert_eq!(fitted, vec![2.5, 2.5]);
    }

    #[test]
    fn binomial_weights_match_direct_formula() {
        let w = BinomialWeights::new(10, 0.3f64);
        let mut c = 1.0;
        for k in 0..=10usize {
            let direct = c * 0.3f64.powi(k as i32) * 0.7f64.powi(10 - k as i32);
            assert!((w.weight(k) - direct).abs() < 1e-14, "k={k}");
            c = c * (10 - k) as f64 / (k + 1) as f64;
        }
        assert!((w.tail(3) - (1.0 - (0.7f64.powi(10) + 10.0 * 0.3 * 0.7f64.powi(9) + 45.0 * 0.09 * 0.7f64.powi(8)))).abs() < 1e-13);
    }

    #[test]
    fn upper_tails_match_direct_tail() {
        let w = BinomialWeights::new(300, 0.37f64);
        let t = UpperTails::new(&w);
        for k in [0, 1, 80, 100, 111, 140, 300, 301] {
            assert!((t.get(k) - w.tail(k)).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn binomial_weights_degenerate_parameters() {
        let w0 = BinomialWeights::new(7, 0.0f64);
        let w1 = BinomialWeights::new(7, 1.0f64);
        let stat: Vec<f64> = (0..=7).map(|k| k as f64).collect();
        assert_eq!(w0.mix(&stat), 0.0);
        assert_eq!(w1.mix(&stat), 7.0);
    }

    proptest! {
        #[test]
        fn binomial_mean_is_np(n in 1usize..3000, p in 0.0f64..1.0) {
            let w = BinomialWeights::new(n, p);
            let stat: Vec<f64> = (0..=n).map(|k| k as f64).collect();
            let total: f64 = w.weights.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((w.mix(&stat) - n as f64 * p).abs() < 1e-8 * (1.0 + n as f64));
        }

        #[test]
        fn pava_output_is_monotone_and_mean_preserving(v in proptest::collection::vec(0.0f64..1.0, 1..40)) {
            let w = vec![1.0; v.len()];
            let fit = isotonic_nondecreasing(&v, &w);
            prop_assert!(fit.windows(2).all(|p| p[0] <= p[1] + 1e-15));
            let s0: f64 = v.iter().sum();
            let s1: f64 = fit.iter().sum();
            prop_assert!((s0 - s1).abs() < 1e-9);
        }

        #[test]
        fn wilson_contains_point_estimate(k in 0u64..200, extra in 0u64..200) {
            let n = k + extra;
            prop_assume!(n > 0);
            let (lo, hi) = wilson(k, n, Z95);
            let ph = k as f64 / n as f64;
            prop_assert!(lo <= ph + 1e-12 && ph <= hi + 1e-12);
        }
    }
}
