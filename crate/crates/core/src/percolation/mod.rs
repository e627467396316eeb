//! Bernoulli bond percolation: sampling, cluster decomposition, permutation
//! sweeps with binomial mixing, and replica-parallel evaluation.

mod clusters;
mod config;
mod sweep;
mod two_point;

pub use clusters::*;
pub use config::*;
pub use sweep::*;
pub use two_point::*;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graphs::Graph;
use crate::rng::{tags, StreamKey, StreamRng};
use crate::unionfind::UnionFind;

pub(crate) fn check_probability(p: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {p}")))
    }
}

/// Stream of replica `stream` for plain sampling under job seed `seed`.
pub fn sample_rng(seed: u64, stream: u64) -> StreamRng {
    StreamKey::new(seed).derive(tags::SAMPLE).rng(stream)
}

/// Bernoulli(`p`) configuration on `g`, determined by `(seed, stream)`.
pub fn sample(g: &Graph, p: f64, seed: u64, stream: u64) -> Result<Configuration> {
    check_probability(p, "p")?;
    let mut open = Vec::new();
    draw_open_edges(g.n_edges(), p, &mut sample_rng(seed, stream), &mut open);
    Ok(Configuration::from_open_edges(g, open.into_iter().map(|e| e as usize)))
}

/// Per-worker buffers reused across replicas. Every replica starts from a
/// freshly reset union-find.
#[derive(Debug, Clone)]
pub struct Scratch {
    pub uf: UnionFind,
    pub open: Vec<u32>,
    pub(crate) perm: Vec<u32>,
    pub(crate) swaps: Vec<u32>,
}

impl Scratch {
    pub fn new(g: &Graph) -> Self {
        Scratch {
            uf: UnionFind::new(g.n_vertices()),
            open: Vec::new(),
            perm: Vec::new(),
            swaps: Vec::new(),
        }
    }

    /// Draws a Bernoulli(`p`) edge set into `self.open`.
    pub fn draw<R: Rng + ?Sized>(&mut self, g: &Graph, p: f64, rng: &mut R) {
        self.open.clear();
        draw_open_edges(g.n_edges(), p, rng, &mut self.open);
    }

    /// Rebuilds the union-find from `self.open`.
    pub fn union_open(&mut self, g: &Graph) {
        self.uf.reset();
        for &e in &self.open {
            let (u, v) = g.edge(e as usize);
            self.uf.union(u, v);
        }
    }

    /// Samples and returns `(|K1|, |K2|)`.
    pub fn percolate<R: Rng + ?Sized>(&mut self, g: &Graph, p: f64, rng: &mut R) -> (usize, usize) {
        self.draw(g, p, rng);
        self.union_open(g);
        self.uf.top_two()
    }

    pub fn decomposition(&mut self) -> ClusterDecomposition {
        ClusterDecomposition::from_union_find(&mut self.uf)
    }

    pub fn configuration(&self, g: &Graph) -> Configuration {
        Configuration::from_open_edges(g, self.open.iter().map(|&e| e as usize))
    }
}

/// Evaluates `f` for replicas `0..n` in parallel, each with a worker-local
/// [`Scratch`]. Output order is replica order whatever the thread count.
pub fn run_replicas<T, F>(g: &Graph, n: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Scratch, u64) -> T + Sync + Send,
{
    (0..n)
        .into_par_iter()
        .map_init(|| Scratch::new(g), |scratch, r| f(scratch, r))
        .collect()
}

/// Largest and second largest cluster of one replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPair {
    pub k1: usize,
    pub k2: usize,
}

/// `(|K1|, |K2|)` of replicas `0..n` at parameter `p`; replica `r` is the
/// configuration `sample(g, p, seed, r)`.
pub fn simulate(g: &Graph, p: f64, replicas: u64, seed: u64) -> Result<Vec<ClusterPair>> {
    check_probability(p, "p")?;
    let key = StreamKey::new(seed).derive(tags::SAMPLE);
    Ok(run_replicas(g, replicas, |s, r| {
        let (k1, k2) = s.percolate(g, p, &mut key.rng(r));
        ClusterPair { k1, k2 }
    }))
}

/// One JSONL row of replica output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaRow {
    pub replica: u64,
    pub p: f64,
    pub k1: usize,
    pub k2: usize,
    #[serde(flatten)]
    pub flags: BTreeMap<String, serde_json::Value>,
}

impl ReplicaRow {
    pub fn new(replica: u64, p: f64, pair: ClusterPair) -> Self {
        ReplicaRow { replica, p, k1: pair.k1, k2: pair.k2, flags: BTreeMap::new() }
    }

    pub fn flag(mut self, name: &str, value: impl Into<serde_json::Value>) -> Self {
        self.flags.insert(name.to_string(), value.into());
        self
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("row serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, torus};

    #[test]
    fn extreme_parameters() {
        let g = torus(&[5, 5]).unwrap();
        let closed = clusters(&g, &sample(&g, 0.0, 1, 0).unwrap()).unwrap();
        assert_eq!(closed.k1_density, 1.0 / 25.0);
        let open = clusters(&g, &sample(&g, 1.0, 1, 0).unwrap()).unwrap();
        assert_eq!(open.k1_density, 1.0);
        assert!(sample(&g, 1.5, 1, 0).is_err());
    }

    #[test]
    fn simulate_agrees_with_sample() {
        let g = cycle(30).unwrap();
        let pairs = simulate(&g, 0.7, 20, 99).unwrap();
        for (r, pair) in pairs.iter().enumerate() {
            let cd = clusters(&g, &sample(&g, 0.7, 99, r as u64).unwrap()).unwrap();
            assert_eq!((cd.k1, cd.k2), (pair.k1, pair.k2));
        }
    }

    #[test]
    fn sampling_is_thread_count_independent() {
        let g = complete(60).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| simulate(&g, 0.03, 200, 5).unwrap());
        let b = four.install(|| simulate(&g, 0.03, 200, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn replica_row_is_single_line_json() {
        let row = ReplicaRow::new(3, 0.5, ClusterPair { k1: 4, k2: 2 }).flag("no_bridge", true);
        let line = row.to_line();
        assert!(!line.contains('\n'));
        assert_eq!(line, r#"{"replica":3,"p":0.5,"k1":4,"k2":2,"no_bridge":true}"#);
    }
}
