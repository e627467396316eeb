//! Permutation sweeps: edges are inserted one by one in a uniformly random
//! order, and a statistic recorded after `m` insertions is turned into a
//! Bernoulli(`p`) expectation by mixing over `m ~ Binomial(|E|, p)`.

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Scratch;
use crate::graphs::Graph;
use crate::rng::{tags, StreamKey, StreamRng};
use crate::stats::BinomialWeights;
use crate::unionfind::{SizeMultiset, UnionFind};

/// State visible to a sweep event after each insertion.
pub struct SweepState<'a> {
    pub m: usize,
    pub k1: usize,
    pub k2: usize,
    pub n_vertices: usize,
    uf: &'a UnionFind,
}

impl SweepState<'_> {
    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.uf.root(u) == self.uf.root(v)
    }
}

pub type SweepEvent<'a> = &'a (dyn Fn(&SweepState<'_>) -> bool + Sync);

/// Statistics after `m = 0..=|E|` insertions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub k1: Vec<u32>,
    pub k2: Vec<u32>,
    pub indicator: Vec<bool>,
}

impl SweepRecord {
    pub fn n_edges(&self) -> usize {
        self.k1.len() - 1
    }
}

pub fn sweep_rng(seed: u64, stream: u64) -> StreamRng {
    StreamKey::new(seed).derive(tags::SWEEP).rng(stream)
}

/// Incremental Fisher–Yates over `0..m`, undone afterwards so the buffer is
/// back to the identity for the next replica.
pub(crate) struct PrefixShuffle<'s> {
    perm: &'s mut Vec<u32>,
    swaps: &'s mut Vec<u32>,
    m: usize,
}

impl<'s> PrefixShuffle<'s> {
    pub(crate) fn new(scratch: &'s mut Scratch, m: usize) -> Self {
        if scratch.perm.len() != m {
            scratch.perm = (0..m as u32).collect();
        }
        scratch.swaps.clear();
        PrefixShuffle { perm: &mut scratch.perm, swaps: &mut scratch.swaps, m }
    }

    pub(crate) fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<usize> {
        let i = self.swaps.len();
        if i >= self.m {
            return None;
        }
        let j = rng.random_range(i..self.m);
        self.perm.swap(i, j);
        self.swaps.push(j as u32);
        Some(self.perm[i] as usize)
    }
}

impl Drop for PrefixShuffle<'_> {
    fn drop(&mut self) {
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.perm.swap(i, j as usize);
        }
        self.swaps.clear();
    }
}

/// Full sweep in a uniformly random edge order drawn from `(seed, stream)`.
pub fn sweep(g: &Graph, seed: u64, stream: u64, event: Option<SweepEvent<'_>>) -> SweepRecord {
    let mut scratch = Scratch::new(g);
    sweep_with(g, &mut scratch, &mut sweep_rng(seed, stream), event)
}

pub(crate) fn sweep_with<R: Rng + ?Sized>(
    g: &Graph,
    scratch: &mut Scratch,
    rng: &mut R,
    event: Option<SweepEvent<'_>>,
) -> SweepRecord {
    let m = g.n_edges();
    let mut order = Vec::with_capacity(m);
    {
        let mut shuffle = PrefixShuffle::new(scratch, m);
        while let Some(e) = shuffle.next(rng) {
            order.push(e);
        }
    }
    sweep_order(g, &order, event)
}

/// Sweep inserting edges in the given order.
pub fn sweep_order(g: &Graph, order: &[usize], event: Option<SweepEvent<'_>>) -> SweepRecord {
    let n = g.n_vertices();
    let mut uf = UnionFind::new(n);
    let mut sizes = SizeMultiset::singletons(n);
    let mut rec = SweepRecord {
        k1: Vec::with_capacity(order.len() + 1),
        k2: Vec::with_capacity(order.len() + 1),
        indicator: Vec::with_capacity(order.len() + 1),
    };
    let mut push = |m: usize, uf: &UnionFind, sizes: &SizeMultiset| {
        let (k1, k2) = (sizes.largest(), sizes.second());
        rec.k1.push(k1 as u32);
        rec.k2.push(k2 as u32);
        let flag = match event {
            Some(ev) => ev(&SweepState { m, k1, k2, n_vertices: n, uf }),
            None => false,
        };
        rec.indicator.push(flag);
    };
    push(0, &uf, &sizes);
    for (i, &e) in order.iter().enumerate() {
        let (u, v) = g.edge(e);
        if let Some((a, b)) = uf.union(u, v) {
            sizes.merge(a, b);
        }
        push(i + 1, &uf, &sizes);
    }
    rec
}

/// Number of insertions after which `|K1| ≥ target` first holds, for the
/// random order drawn from `rng`. Only the needed prefix of the order is
/// generated. Returns `|E| + 1` if the target is never reached.
pub(crate) fn k1_hitting_time<R: Rng + ?Sized>(
    g: &Graph,
    scratch: &mut Scratch,
    rng: &mut R,
    target: usize,
) -> usize {
    if target <= 1 {
        return 0;
    }
    let m = g.n_edges();
    scratch.uf.reset();
    let mut uf = std::mem::replace(&mut scratch.uf, UnionFind::new(0));
    let mut hit = m + 1;
    {
        let mut shuffle = PrefixShuffle::new(scratch, m);
        let mut inserted = 0;
        while let Some(e) = shuffle.next(rng) {
            inserted += 1;
            let (u, v) = g.edge(e);
            if let Some((a, b)) = uf.union(u, v) {
                if a + b >= target {
                    hit = inserted;
                    break;
                }
            }
        }
    }
    scratch.uf = uf;
    hit
}

/// `Σ_m Binom(m; |E|, p) · stat[m]` for `stat` indexed by `m = 0..=|E|`.
pub fn binomial_mix<T: Float>(stat: &[T], p: T) -> T {
    assert!(!stat.is_empty());
    BinomialWeights::new(stat.len() - 1, p).mix(stat)
}

/// Per-`m` means over several sweep records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeans {
    pub n_vertices: usize,
    pub records: usize,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    pub indicator: Vec<f64>,
}

impl SweepMeans {
    pub fn from_records(n_vertices: usize, records: &[SweepRecord]) -> Self {
        assert!(!records.is_empty());
        let len = records[0].k1.len();
        let mut k1 = vec![0.0; len];
        let mut k2 = vec![0.0; len];
        let mut ind = vec![0.0; len];
        for rec in records {
            for m in 0..len {
                k1[m] += rec.k1[m] as f64;
                k2[m] += rec.k2[m] as f64;
                ind[m] += rec.indicator[m] as u8 as f64;
            }
        }
        let r = records.len() as f64;
        for m in 0..len {
            k1[m] /= r;
            k2[m] /= r;
            ind[m] /= r;
        }
        SweepMeans { n_vertices, records: records.len(), k1, k2, indicator: ind }
    }

    /// Mixed `E_p ‖K1‖`.
    pub fn k1_density(&self, p: f64) -> f64 {
        binomial_mix(&self.k1, p) / self.n_vertices as f64
    }

    pub fn k2_density(&self, p: f64) -> f64 {
        binomial_mix(&self.k2, p) / self.n_vertices as f64
    }

    pub fn event_probability(&self, p: f64) -> f64 {
        binomial_mix(&self.indicator, p)
    }
}

/// Sweep records for streams `0..n`, evaluated in parallel.
pub fn sweep_pool(g: &Graph, n: u64, seed: u64, event: Option<SweepEvent<'_>>) -> Vec<SweepRecord> {
    let key = StreamKey::new(seed).derive(tags::SWEEP);
    super::run_replicas(g, n, |s, r| sweep_with(g, s, &mut key.rng(r), event))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle};
    use crate::percolation::{clusters, Configuration};

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn cycle_sweep_is_a_forest_until_the_last_edge() {
        let g = cycle(12).unwrap();
        let rec = sweep(&g, 1, 0, None);
        for m in 0..11 {
            assert!(rec.k1[m] as usize <= m + 1);
        }
        // Any 11 edges of C_12 form a spanning path.
        assert_eq!(rec.k1[11], 12);
        assert_eq!(rec.k1[12], 12);
    }

    #[test]
    fn sweep_ends_connected_and_is_monotone() {
        let g = complete(9).unwrap();
        let rec = sweep(&g, 4, 2, None);
        assert_eq!(rec.k1[0], 1);
        assert_eq!(*rec.k1.last().unwrap() as usize, g.n_vertices());
        assert!(rec.k1.windows(2).all(|w| w[0] <= w[1]));
        assert!(rec.k1.iter().zip(&rec.k2).all(|(a, b)| a >= b));
    }

    #[test]
    fn sweep_k2_matches_direct_decomposition() {
        let g = complete(7).unwrap();
        let mut scratch = Scratch::new(&g);
        let mut rng = sweep_rng(3, 1);
        let rec = sweep_with(&g, &mut scratch, &mut rng, None);
        // Recover the order from a second identical draw.
        let mut order = Vec::new();
        let mut rng = sweep_rng(3, 1);
        let mut shuffle = PrefixShuffle::new(&mut scratch, g.n_edges());
        while let Some(e) = shuffle.next(&mut rng) {
            order.push(e);
        }
        drop(shuffle);
        for m in 0..=g.n_edges() {
            let cd = clusters(&g, &Configuration::from_open_edges(&g, order[..m].iter().copied())).unwrap();
            assert_eq!((rec.k1[m] as usize, rec.k2[m] as usize), (cd.k1, cd.k2), "m={m}");
        }
    }

    #[test]
    fn hitting_time_matches_full_sweep() {
        let g = complete(30).unwrap();
        let mut scratch = Scratch::new(&g);
        for r in 0..20 {
            let rec = sweep_with(&g, &mut scratch, &mut sweep_rng(8, r), None);
            let hit = k1_hitting_time(&g, &mut scratch, &mut sweep_rng(8, r), 15);
            let expect = rec.k1.iter().position(|&k| k >= 15).unwrap();
            assert_eq!(hit, expect);
        }
        assert_eq!(scratch.perm, (0..g.n_edges() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn binomial_mix_endpoints() {
        let stat = [3.0, 5.0, 8.0];
        assert_eq!(binomial_mix(&stat, 0.0), 3.0);
        assert_eq!(binomial_mix(&stat, 1.0), 8.0);
    }

    #[test]
    fn exact_average_over_all_orders_on_c4() {
        // Averaging over all 24 orders gives E[indicator | m open] exactly;
        // mixing at p = 1/2 then gives P(|K1| >= 3) = 9/16.
        let g = cycle(4).unwrap();
        let ev = |s: &SweepState<'_>| s.k1 >= 3;
        let recs: Vec<SweepRecord> = permutations(4).iter().map(|o| sweep_order(&g, o, Some(&ev))).collect();
        let means = SweepMeans::from_records(4, &recs);
        assert!((means.event_probability(0.5) - 9.0 / 16.0).abs() < 1e-15);
    }
}
