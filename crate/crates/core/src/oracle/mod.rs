//! Exact enumeration over all `2^|E|` configurations of tiny graphs.
//!
//! Event probabilities are kept as level counts `N_k` (the number of
//! configurations in the event with `k` open edges), so that
//! `P_p(A) = Σ_k N_k p^k (1-p)^{|E|-k}` can be evaluated exactly at rational
//! `p` or in floating point.

mod battery;
mod checks;

pub use battery::*;
pub use checks::*;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::scalar::Scalar;
use crate::unionfind::UnionFind;

pub const MAX_ORACLE_EDGES: usize = 22;

/// Exact level counts of an event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCounts {
    pub m_edges: usize,
    pub counts: Vec<BigUint>,
}

pub(crate) fn binomial(n: usize, k: usize) -> BigUint {
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

impl LevelCounts {
    pub fn from_u64(counts: &[u64]) -> Self {
        LevelCounts { m_edges: counts.len() - 1, counts: counts.iter().map(|&c| BigUint::from(c)).collect() }
    }

    /// The certain event.
    pub fn full(m_edges: usize) -> Self {
        LevelCounts { m_edges, counts: (0..=m_edges).map(|k| binomial(m_edges, k)).collect() }
    }

    /// The impossible event.
    pub fn empty(m_edges: usize) -> Self {
        LevelCounts { m_edges, counts: vec![BigUint::zero(); m_edges + 1] }
    }

    pub fn complement(&self) -> Self {
        let full = Self::full(self.m_edges);
        LevelCounts {
            m_edges: self.m_edges,
            counts: full.counts.iter().zip(&self.counts).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_never(&self) -> bool {
        self.counts.iter().all(|c| c.is_zero())
    }

    pub fn is_always(&self) -> bool {
        *self == Self::full(self.m_edges)
    }

    /// `P_p(A)`.
    pub fn eval<T: Scalar>(&self, p: &T) -> T {
        let q = T::one() - p.clone();
        let m = self.m_edges as u64;
        T::sum_all(self.counts.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| {
            T::from_biguint(c) * p.powu(k as u64) * q.powu(m - k as u64)
        }))
    }

    /// `d/dp P_p(A)` from the closed-form derivative of each term.
    pub fn derivative<T: Scalar>(&self, p: &T) -> T {
        let q = T::one() - p.clone();
        let m = self.m_edges as u64;
        let mut terms = Vec::new();
        for (k, c) in self.counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let k = k as u64;
            let c = T::from_biguint(c);
            if k > 0 {
                terms.push(c.clone() * T::from_ratio(k, 1) * p.powu(k - 1) * q.powu(m - k));
            }
            if k < m {
                terms.push(T::zero() - c * T::from_ratio(m - k, 1) * p.powu(k) * q.powu(m - k - 1));
            }
        }
        T::sum_all(terms)
    }

    pub fn to_json(&self) -> LevelCountsJson {
        LevelCountsJson { m_edges: self.m_edges, counts: self.counts.iter().map(|c| c.to_string()).collect() }
    }

    pub fn from_json(json: &LevelCountsJson) -> Result<Self> {
        if json.counts.len() != json.m_edges + 1 {
            return Err(invalid("level counts need m_edges + 1 entries"));
        }
        let counts = json
            .counts
            .iter()
            .map(|s| s.parse::<BigUint>().map_err(|e| invalid(format!("bad count {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        for (k, c) in counts.iter().enumerate() {
            if *c > binomial(json.m_edges, k) {
                return Err(invalid(format!("count at level {k} exceeds C({}, {k})", json.m_edges)));
            }
        }
        Ok(LevelCounts { m_edges: json.m_edges, counts })
    }
}

/// Wire form: counts as decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCountsJson {
    pub m_edges: usize,
    pub counts: Vec<String>,
}

/// One configuration as seen by an event predicate.
pub struct ConfigView<'a> {
    pub mask: u64,
    pub n_vertices: usize,
    pub k1: usize,
    pub k2: usize,
    graph: &'a Graph,
    uf: &'a UnionFind,
}

impl ConfigView<'_> {
    pub fn is_open(&self, e: usize) -> bool {
        (self.mask >> e) & 1 == 1
    }

    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.uf.root(u) == self.uf.root(v)
    }

    pub fn k1_density(&self) -> f64 {
        self.k1 as f64 / self.n_vertices as f64
    }

    /// Whether `‖K1‖ ≥ num/den`, decided in integers.
    pub fn k1_at_least(&self, num: usize, den: usize) -> bool {
        self.k1 * den >= num * self.n_vertices
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// `|K1|` of `ω ∪ extra` (extra given as an edge mask).
    pub fn k1_with(&self, extra: u64) -> usize {
        let mut uf = UnionFind::new(self.n_vertices);
        let all = self.mask | extra;
        for e in 0..self.graph.n_edges() {
            if (all >> e) & 1 == 1 {
                let (u, v) = self.graph.edge(e);
                uf.union(u, v);
            }
        }
        uf.top_two().0
    }
}

pub type Predicate<'a> = &'a (dyn Fn(&ConfigView<'_>) -> bool + Sync);

#[inline]
fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

fn check_size(g: &Graph) -> Result<usize> {
    let m = g.n_edges();
    if m > MAX_ORACLE_EDGES {
        return Err(Error::SizeLimit { what: "edges for exact enumeration", value: m, limit: MAX_ORACLE_EDGES });
    }
    Ok(m)
}

/// Membership bitmap of an event over all `2^|E|` configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTable {
    pub m_edges: usize,
    bits: Vec<u64>,
}

impl EventTable {
    /// Enumerates every configuration of `g` and evaluates `pred`.
    ///
    /// The index space is split into aligned blocks of `2^k` indices; each
    /// block is walked in Gray-code order, which maps it onto an aligned
    /// block of configurations, so blocks fill disjoint bitmap ranges.
    pub fn build(g: &Graph, pred: Predicate<'_>) -> Result<Self> {
        let m = check_size(g)?;
        let block_bits = m.min(12);
        let n_blocks = 1u64 << (m - block_bits);
        let block_len = 1u64 << block_bits;
        let words_per_block = block_len.div_ceil(64) as usize;
        let edges: Vec<(usize, usize)> = (0..m).map(|e| g.edge(e)).collect();
        let blocks: Vec<(u64, Vec<u64>)> = (0..n_blocks)
            .into_par_iter()
            .map_init(
                || UnionFind::new(g.n_vertices()),
                |uf, c| {
                    let mut words = vec![0u64; words_per_block];
                    let target = gray(c);
                    for i in c * block_len..(c + 1) * block_len {
                        let mask = gray(i);
                        uf.reset();
                        let mut rest = mask;
                        while rest != 0 {
                            let e = rest.trailing_zeros() as usize;
                            rest &= rest - 1;
                            uf.union(edges[e].0, edges[e].1);
                        }
                        let (k1, k2) = uf.top_two();
                        let view = ConfigView { mask, n_vertices: g.n_vertices(), k1, k2, graph: g, uf };
                        if pred(&view) {
                            let local = mask - target * block_len;
                            words[(local / 64) as usize] |= 1 << (local % 64);
                        }
                    }
                    (target, words)
                },
            )
            .collect();
        let total_words = (1u64 << m).div_ceil(64) as usize;
        let mut bits = vec![0u64; total_words];
        for (target, words) in blocks {
            let start = (target * block_len / 64) as usize;
            if block_len >= 64 {
                bits[start..start + words.len()].copy_from_slice(&words);
            } else {
                bits[0] |= words[0];
            }
        }
        Ok(EventTable { m_edges: m, bits })
    }

    /// Table of an event given directly as a function of the edge mask.
    pub fn from_mask_fn(m_edges: usize, f: impl Fn(u64) -> bool + Sync) -> Result<Self> {
        if m_edges > MAX_ORACLE_EDGES {
            return Err(Error::SizeLimit { what: "edges for exact enumeration", value: m_edges, limit: MAX_ORACLE_EDGES });
        }
        let total = 1u64 << m_edges;
        let bits = (0..total.div_ceil(64))
            .into_par_iter()
            .map(|w| {
                let mut word = 0u64;
                for b in 0..64 {
                    let mask = w * 64 + b;
                    if mask < total && f(mask) {
                        word |= 1 << b;
                    }
                }
                word
            })
            .collect();
        Ok(EventTable { m_edges, bits })
    }

    pub fn contains(&self, mask: u64) -> bool {
        (self.bits[(mask / 64) as usize] >> (mask % 64)) & 1 == 1
    }

    pub fn n_configurations(&self) -> u64 {
        1u64 << self.m_edges
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.n_configurations()).filter(move |&m| self.contains(m))
    }

    pub fn level_counts(&self) -> LevelCounts {
        self.level_counts_where(|mask| self.contains(mask))
    }

    fn level_counts_where(&self, f: impl Fn(u64) -> bool + Sync) -> LevelCounts {
        let m = self.m_edges;
        let counts = (0..self.n_configurations())
            .into_par_iter()
            .fold(
                || vec![0u64; m + 1],
                |mut acc, mask| {
                    if f(mask) {
                        acc[mask.count_ones() as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; m + 1],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        LevelCounts::from_u64(&counts)
    }

    /// Checks every single-edge superset relation: `ω ∈ A ⇒ ω ∪ {e} ∈ A`.
    pub fn check_increasing(&self) -> Result<()> {
        let m = self.m_edges;
        let witness = (0..self.n_configurations()).into_par_iter().find_map_first(|mask| {
            if !self.contains(mask) {
                return None;
            }
            (0..m).find(|&e| (mask >> e) & 1 == 0 && !self.contains(mask | (1 << e))).map(|e| (mask, e))
        });
        match witness {
            Some((mask, edge)) => Err(Error::NotMonotone { witness: mask, edge }),
            None => Ok(()),
        }
    }

    /// Level counts of `{ω : e is pivotal}`, i.e. flipping `e` changes
    /// membership.
    pub fn pivotal_counts(&self, e: usize) -> LevelCounts {
        self.level_counts_where(|mask| self.contains(mask) != self.contains(mask ^ (1 << e)))
    }

    pub fn intersection(&self, other: &EventTable) -> EventTable {
        assert_eq!(self.m_edges, other.m_edges);
        EventTable { m_edges: self.m_edges, bits: self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect() }
    }
}

/// Exact level counts of the event `pred` on `g`.
pub fn exact_event(g: &Graph, pred: Predicate<'_>) -> Result<LevelCounts> {
    Ok(EventTable::build(g, pred)?.level_counts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, hypercube};
    use crate::Exact;
    use proptest::prelude::*;

    #[test]
    fn certain_event_on_triangle() {
        let g = cycle(3).unwrap();
        let lc = exact_event(&g, &|_| true).unwrap();
        assert_eq!(lc, LevelCounts::from_u64(&[1, 3, 3, 1]));
        assert!(lc.is_always());
    }

    #[test]
    fn c4_large_cluster_is_nine_sixteenths() {
        let g = cycle(4).unwrap();
        let lc = exact_event(&g, &|c| c.k1 >= 3).unwrap();
        assert_eq!(lc.eval(&Exact::from_ratio(1, 2)), Exact::from_ratio(9, 16));
    }

    #[test]
    fn triangle_two_point_is_five_eighths() {
        let g = complete(3).unwrap();
        let lc = exact_event(&g, &|c| c.connected(0, 1)).unwrap();
        assert_eq!(lc.eval(&Exact::from_ratio(1, 2)), Exact::from_ratio(5, 8));
    }

    #[test]
    fn eval_and_derivative_basics() {
        let full = LevelCounts::full(5);
        let empty = LevelCounts::empty(5);
        for j in 0..=4 {
            let p = Exact::from_ratio(j, 4);
            assert_eq!(full.eval(&p), Exact::from_ratio(1, 1));
            assert_eq!(empty.eval(&p), Exact::from_ratio(0, 1));
        }
        let edge = LevelCounts::from_u64(&[0, 1]);
        for j in 0..=4 {
            assert_eq!(edge.derivative(&Exact::from_ratio(j, 4)), Exact::from_ratio(1, 1));
        }
        assert!((edge.derivative(&0.3f64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gray_blocks_cover_every_configuration() {
        // 14 edges: two blocks of 2^12 and the Gray walk must touch each
        // configuration exactly once.
        let g = cycle(14).unwrap();
        let table = EventTable::build(&g, &|_| true).unwrap();
        assert_eq!(table.members().count() as u64, 1 << 14);
    }

    #[test]
    fn size_limit_is_enforced() {
        let g = complete(8).unwrap();
        assert!(matches!(exact_event(&g, &|_| true), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = hypercube(3).unwrap();
        let lc = exact_event(&g, &|c| c.k1 == 8).unwrap();
        let json = lc.to_json();
        assert_eq!(LevelCounts::from_json(&json).unwrap(), lc);
        let bad = LevelCountsJson { m_edges: 2, counts: vec!["1".into(), "3".into(), "1".into()] };
        assert!(LevelCounts::from_json(&bad).is_err());
    }

    #[test]
    fn increasing_check_finds_witness() {
        let g = cycle(4).unwrap();
        let table = EventTable::build(&g, &|c| c.k1 == 2).unwrap();
        assert!(matches!(table.check_increasing(), Err(Error::NotMonotone { .. })));
        let table = EventTable::build(&g, &|c| c.k1 >= 2).unwrap();
        assert!(table.check_increasing().is_ok());
    }

    proptest! {
        #[test]
        fn complements_sum_to_binomials(n in 3usize..7, threshold in 1usize..7) {
            let g = cycle(n).unwrap();
            let lc = exact_event(&g, &|c| c.k1 >= threshold).unwrap();
            let comp = lc.complement();
            let full = LevelCounts::full(n);
            for k in 0..=n {
                prop_assert_eq!(&lc.counts[k] + &comp.counts[k], full.counts[k].clone());
            }
            let grid: Vec<Exact> = (0..=10).map(|j| Exact::from_ratio(j, 10)).collect();
            let vals: Vec<Exact> = grid.iter().map(|p| lc.eval(p)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
