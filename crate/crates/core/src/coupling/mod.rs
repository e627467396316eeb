//! The monotone coupling `ω_q ⊆ ω_p`, sandcastles, localization and
//! activation probabilities.

mod events;
mod sandcastle;

pub use events::*;
pub use sandcastle::*;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graphs::Graph;
use crate::percolation::{check_probability, draw_open_edges, Configuration};
use crate::rng::{tags, StreamKey, StreamRng};
use crate::unionfind::UnionFind;

/// A coupled pair with `ω_q ⊆ ω_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledPair {
    pub q: f64,
    pub p: f64,
    pub omega_p: Configuration,
    pub omega_q: Configuration,
}

pub(crate) fn check_pair(q: f64, p: f64) -> Result<()> {
    check_probability(q, "q")?;
    check_probability(p, "p")?;
    if q > p {
        return Err(invalid(format!("need q ≤ p, got q = {q} > p = {p}")));
    }
    Ok(())
}

pub fn coupled_rng(seed: u64, stream: u64) -> StreamRng {
    StreamKey::new(seed).derive(tags::COUPLED).rng(stream)
}

/// Draws the open edges of `ω_p` into `open_p`, and those of `ω_q` into
/// `open_q` by keeping each open edge of `ω_p` with probability `q/p`.
///
/// This is the per-edge uniform construction (`U ≤ p` resp. `U ≤ q`) read
/// in two stages: given `U ≤ p`, `U/p` is uniform.
pub(crate) fn draw_coupled<R: Rng + ?Sized>(
    m: usize,
    q: f64,
    p: f64,
    rng: &mut R,
    open_p: &mut Vec<u32>,
    open_q: &mut Vec<u32>,
) {
    open_p.clear();
    open_q.clear();
    draw_open_edges(m, p, rng, open_p);
    if q >= p {
        open_q.extend_from_slice(open_p);
        return;
    }
    let keep = q / p;
    for &e in open_p.iter() {
        if rng.random::<f64>() < keep {
            open_q.push(e);
        }
    }
}

pub fn sample_coupled(g: &Graph, q: f64, p: f64, seed: u64, stream: u64) -> Result<CoupledPair> {
    check_pair(q, p)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    draw_coupled(g.n_edges(), q, p, &mut coupled_rng(seed, stream), &mut a, &mut b);
    let omega_p = Configuration::from_open_edges(g, a.iter().map(|&e| e as usize));
    let omega_q = Configuration::from_open_edges(g, b.iter().map(|&e| e as usize));
    assert!(omega_q.is_subset_of(&omega_p), "coupling must be monotone");
    Ok(CoupledPair { q, p, omega_p, omega_q })
}

/// Vertex set plus edge set; for clusters the edges are the induced open
/// edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Subgraph {
    /// Validates ranges and that every edge has both ends in `vertices`.
    pub fn new(g: &Graph, mut vertices: Vec<usize>, mut edges: Vec<usize>) -> Result<Self> {
        vertices.sort_unstable();
        vertices.dedup();
        edges.sort_unstable();
        edges.dedup();
        if vertices.iter().any(|&v| v >= g.n_vertices()) || edges.iter().any(|&e| e >= g.n_edges()) {
            return Err(invalid("subgraph vertex or edge out of range"));
        }
        for &e in &edges {
            let (u, v) = g.edge(e);
            if vertices.binary_search(&u).is_err() || vertices.binary_search(&v).is_err() {
                return Err(invalid(format!("edge {e} leaves the vertex set")));
            }
        }
        Ok(Subgraph { vertices, edges })
    }

    /// The induced subgraph on `vertices`.
    pub fn induced(g: &Graph, vertices: Vec<usize>) -> Result<Self> {
        let mut inside = vec![false; g.n_vertices()];
        for &v in &vertices {
            if v >= g.n_vertices() {
                return Err(invalid("subgraph vertex out of range"));
            }
            inside[v] = true;
        }
        let edges = (0..g.n_edges()).filter(|&e| {
            let (u, v) = g.edge(e);
            inside[u] && inside[v]
        });
        Subgraph::new(g, vertices, edges.collect())
    }

    /// The open cluster of `v` in `omega`, with its open edges.
    pub fn cluster(g: &Graph, omega: &Configuration, v: usize) -> Result<Self> {
        let cd = crate::percolation::clusters(g, omega)?;
        let vertices = cd.cluster_of(v);
        let id = cd.representative[v];
        let edges = omega.iter_open().filter(|&e| cd.representative[g.edge(e).0] == id).collect();
        Ok(Subgraph { vertices, edges })
    }

    pub fn density(&self, g: &Graph) -> f64 {
        self.vertices.len() as f64 / g.n_vertices() as f64
    }

    pub fn is_connected(&self, g: &Graph) -> bool {
        if self.vertices.len() <= 1 {
            return true;
        }
        let mut uf = UnionFind::new(g.n_vertices());
        for &e in &self.edges {
            let (u, v) = g.edge(e);
            uf.union(u, v);
        }
        let root = uf.find(self.vertices[0]);
        self.vertices.iter().all(|&v| uf.find(v) == root)
    }

    /// `H̄`: every edge of `g` with at least one endpoint in the vertex set.
    pub fn closure_edges(&self, g: &Graph) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertices.iter().flat_map(|&v| g.neighbors(v).iter().map(|&(_, e)| e as usize)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
