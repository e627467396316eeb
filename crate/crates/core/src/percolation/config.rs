use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graphs::Graph;
use crate::rng::open_unit;

/// Above this edge probability the sampler draws one uniform per edge;
/// below it, it skips over closed edges with geometric gaps.
const DENSE_SAMPLING_THRESHOLD: f64 = 0.25;

/// Open/closed indicator over the edge indices of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    n_vertices: usize,
    n_edges: usize,
    bits: Vec<u64>,
}

impl Configuration {
    pub fn closed(g: &Graph) -> Self {
        Configuration {
            n_vertices: g.n_vertices(),
            n_edges: g.n_edges(),
            bits: vec![0; g.n_edges().div_ceil(64)],
        }
    }

    pub fn open_all(g: &Graph) -> Self {
        let mut c = Self::closed(g);
        for e in 0..g.n_edges() {
            c.set(e, true);
        }
        c
    }

    pub fn from_open_edges<I: IntoIterator<Item = usize>>(g: &Graph, open: I) -> Self {
        let mut c = Self::closed(g);
        for e in open {
            c.set(e, true);
        }
        c
    }

    /// Configuration whose edge `e` is open iff bit `e` of `mask` is set.
    pub fn from_mask(g: &Graph, mask: u64) -> Self {
        assert!(g.n_edges() <= 64);
        let mut c = Self::closed(g);
        if g.n_edges() > 0 {
            c.bits[0] = mask & (u64::MAX >> (64 - g.n_edges()));
        }
        c
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Whether this configuration was built over a graph of `g`'s shape.
    pub fn matches(&self, g: &Graph) -> bool {
        self.n_edges == g.n_edges() && self.n_vertices == g.n_vertices()
    }

    pub fn is_open(&self, e: usize) -> bool {
        (self.bits[e / 64] >> (e % 64)) & 1 == 1
    }

    pub fn set(&mut self, e: usize, open: bool) {
        assert!(e < self.n_edges, "edge {e} out of range");
        if open {
            self.bits[e / 64] |= 1 << (e % 64);
        } else {
            self.bits[e / 64] &= !(1 << (e % 64));
        }
    }

    pub fn count_open(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_open(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let t = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(i * 64 + t)
            })
        })
    }

    /// Edgewise `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Configuration) -> bool {
        self.n_edges == other.n_edges && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

/// Appends the open edges of a Bernoulli(`p`) configuration on `m` edges to
/// `out`, in increasing order.
pub(crate) fn draw_open_edges<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R, out: &mut Vec<u32>) {
    if p <= 0.0 || m == 0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..m as u32);
        return;
    }
    if p > DENSE_SAMPLING_THRESHOLD {
        for e in 0..m {
            if rng.random::<f64>() < p {
                out.push(e as u32);
            }
        }
        return;
    }
    let log_q = (-p).ln_1p();
    let mut next: u64 = 0;
    loop {
        let gap = (open_unit(rng).ln() / log_q).floor();
        if !(gap < (m as u64 - next) as f64) {
            break;
        }
        next += gap as u64;
        out.push(next as u32);
        next += 1;
        if next >= m as u64 {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::cycle;
    use crate::rng::StreamKey;

    #[test]
    fn bit_operations() {
        let g = cycle(70).unwrap();
        let mut c = Configuration::closed(&g);
        c.set(3, true);
        c.set(69, true);
        assert_eq!(c.iter_open().collect::<Vec<_>>(), vec![3, 69]);
        assert_eq!(c.count_open(), 2);
        let all = Configuration::open_all(&g);
        assert!(c.is_subset_of(&all));
        assert!(!all.is_subset_of(&c));
        c.set(3, false);
        assert!(!c.is_open(3));
    }

    #[test]
    fn geometric_sampler_has_the_right_mean() {
        let key = StreamKey::new(11);
        for &p in &[0.01, 0.2, 0.6] {
            let mut total = 0usize;
            let reps = 400;
            for r in 0..reps {
                let mut out = Vec::new();
                draw_open_edges(1000, p, &mut key.rng(r), &mut out);
                assert!(out.windows(2).all(|w| w[0] < w[1]));
                assert!(out.iter().all(|&e| e < 1000));
                total += out.len();
            }
            let mean = total as f64 / reps as f64;
            let sd = (1000.0 * p * (1.0 - p) / reps as f64).sqrt();
            assert!((mean - 1000.0 * p).abs() < 5.0 * sd, "p={p} mean={mean}");
        }
    }
}
