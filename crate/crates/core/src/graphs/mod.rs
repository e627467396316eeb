//! Simple graphs with fixed vertex/edge indexing and declared edge orbits.

mod families;

pub use families::*;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{invalid, Error, Result};

/// Above this many vertices [`Graph::diameter`] brackets instead of running
/// BFS from every source.
pub const EXACT_DIAMETER_LIMIT: usize = 4096;
const SAMPLED_DIAMETER_SOURCES: usize = 64;

/// Descriptive family name plus constructor parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub family: String,
    pub params: Map<String, Value>,
}

impl FamilyTag {
    pub fn new(family: &str, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        FamilyTag { family: family.to_string(), params }
    }
}

/// Immutable, simple, connected graph.
///
/// Edges are stored as `(u, v)` with `u < v`; edge `i` is `edges()[i]`. The
/// adjacency is a CSR list of `(neighbour, edge index)` pairs per vertex.
#[derive(Debug, Clone)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    adjacency: Vec<(u32, u32)>,
    edge_orbits: Option<Vec<Vec<usize>>>,
    transitive: bool,
    tag: FamilyTag,
}

/// Diameter bracket. Exact when `lower == upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiameterBound {
    pub lower: usize,
    pub upper: usize,
}

impl DiameterBound {
    pub fn exact(&self) -> Option<usize> {
        (self.lower == self.upper).then_some(self.lower)
    }
}

impl Graph {
    /// Builds and validates a graph. Edge endpoints are normalised to
    /// `u < v`; order of the edge list is preserved.
    pub fn from_edges(
        n_vertices: usize,
        edges: Vec<(usize, usize)>,
        edge_orbits: Option<Vec<Vec<usize>>>,
        transitive: bool,
        tag: FamilyTag,
    ) -> Result<Graph> {
        if n_vertices == 0 {
            return Err(invalid("graph needs at least one vertex"));
        }
        if n_vertices > u32::MAX as usize || edges.len() > u32::MAX as usize {
            return Err(Error::SizeLimit {
                what: "graph size",
                value: n_vertices.max(edges.len()),
                limit: u32::MAX as usize,
            });
        }
        let mut normalised = Vec::with_capacity(edges.len());
        let mut seen = HashSet::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(invalid(format!("edge ({a},{b}) has an endpoint out of range")));
            }
            if a == b {
                return Err(invalid(format!("loop at vertex {a}")));
            }
            let e = (a.min(b) as u32, a.max(b) as u32);
            if !seen.insert(e) {
                return Err(invalid(format!("repeated edge ({},{})", e.0, e.1)));
            }
            normalised.push(e);
        }

        let mut degree = vec![0usize; n_vertices];
        for &(u, v) in &normalised {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n_vertices + 1];
        for v in 0..n_vertices {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0u32, 0u32); 2 * normalised.len()];
        for (i, &(u, v)) in normalised.iter().enumerate() {
            adjacency[fill[u as usize]] = (v, i as u32);
            fill[u as usize] += 1;
            adjacency[fill[v as usize]] = (u, i as u32);
            fill[v as usize] += 1;
        }

        let graph = Graph {
            n_vertices,
            edges: normalised,
            offsets,
            adjacency,
            edge_orbits,
            transitive,
            tag,
        };
        graph.validate()?;
        Ok(graph)
    }

    fn validate(&self) -> Result<()> {
        if !self.is_connected() {
            return Err(invalid(format!("{} graph is disconnected", self.tag.family)));
        }
        if self.transitive {
            let d0 = self.degree(0);
            if (0..self.n_vertices).any(|v| self.degree(v) != d0) {
                return Err(invalid("graph flagged transitive has unequal degrees"));
            }
        }
        if let Some(orbits) = &self.edge_orbits {
            let mut hit = vec![false; self.edges.len()];
            for class in orbits {
                if class.is_empty() {
                    return Err(invalid("empty edge orbit class"));
                }
                for &e in class {
                    if e >= self.edges.len() || hit[e] {
                        return Err(invalid(format!("edge orbits are not a partition (edge {e})")));
                    }
                    hit[e] = true;
                }
            }
            if hit.iter().any(|&h| !h) {
                return Err(invalid("edge orbits do not cover every edge"));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        let (u, v) = self.edges[e];
        (u as usize, v as usize)
    }

    /// `(neighbour, edge index)` pairs of `v`.
    pub fn neighbors(&self, v: usize) -> &[(u32, u32)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_vertices).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n_vertices).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n_vertices).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Average degree `2|E|/|V|`.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges() as f64 / self.n_vertices as f64
    }

    pub fn edge_orbits(&self) -> Option<&[Vec<usize>]> {
        self.edge_orbits.as_deref()
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn family(&self) -> &FamilyTag {
        &self.tag
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a)
            .iter()
            .find(|&&(w, _)| w as usize == b)
            .map(|&(_, e)| e as usize)
    }

    fn is_connected(&self) -> bool {
        self.bfs(0).iter().all(|&d| d != usize::MAX)
    }

    /// BFS distances from `source` (`usize::MAX` for unreachable vertices).
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in self.neighbors(u) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn eccentricity(&self, v: usize) -> Result<usize> {
        let dist = self.bfs(v);
        let mut ecc = 0;
        for d in dist {
            if d == usize::MAX {
                return Err(Error::InfiniteDiameter);
            }
            ecc = ecc.max(d);
        }
        Ok(ecc)
    }

    /// Exact diameter up to [`EXACT_DIAMETER_LIMIT`] vertices; above it a
    /// bracket from evenly spaced BFS sources (`ecc ≤ diam ≤ 2·ecc`).
    pub fn diameter(&self) -> Result<DiameterBound> {
        if self.n_vertices <= EXACT_DIAMETER_LIMIT {
            let mut d = 0;
            for v in 0..self.n_vertices {
                d = d.max(self.eccentricity(v)?);
            }
            return Ok(DiameterBound { lower: d, upper: d });
        }
        let step = self.n_vertices / SAMPLED_DIAMETER_SOURCES;
        let mut lower = 0;
        let mut upper = usize::MAX;
        for i in 0..SAMPLED_DIAMETER_SOURCES {
            let ecc = self.eccentricity(i * step)?;
            lower = lower.max(ecc);
            upper = upper.min(2 * ecc);
        }
        Ok(DiameterBound { lower, upper: upper.max(lower) })
    }

    /// `(3 - a)/a` with `a = min degree / |V|`, the diameter bound for graphs
    /// of linear minimum degree.
    pub fn dense_diameter_bound(&self) -> Option<f64> {
        let a = self.min_degree() as f64 / self.n_vertices as f64;
        (a > 0.0).then(|| (3.0 - a) / a)
    }

    /// Full invariant check, used by tests and after parsing.
    pub fn check_invariants(&self) -> Result<()> {
        self.validate()?;
        let mut sorted = self.edges.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || self.edges.iter().any(|&(u, v)| u >= v) {
            return Err(invalid("edge list is not simple"));
        }
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let in_u = self.neighbors(u as usize).iter().any(|&(w, i)| w == v && i as usize == e);
            let in_v = self.neighbors(v as usize).iter().any(|&(w, i)| w == u && i as usize == e);
            if !in_u || !in_v {
                return Err(invalid(format!("adjacency inconsistent at edge {e}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            family: self.tag.family.clone(),
            params: self.tag.params.clone(),
            n_vertices: self.n_vertices,
            edges: self.edges.iter().map(|&(u, v)| [u as usize, v as usize]).collect(),
            edge_orbits: self.edge_orbits.clone(),
            transitive: self.transitive,
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("graph JSON serialises")
    }

    pub fn from_json(json: GraphJson) -> Result<Graph> {
        Graph::from_edges(
            json.n_vertices,
            json.edges.into_iter().map(|[u, v]| (u, v)).collect(),
            json.edge_orbits,
            json.transitive,
            FamilyTag { family: json.family, params: json.params },
        )
    }

    pub fn from_json_str(s: &str) -> Result<Graph> {
        let json: GraphJson =
            serde_json::from_str(s).map_err(|e| invalid(format!("graph JSON: {e}")))?;
        Graph::from_json(json)
    }
}

/// Wire form of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub family: String,
    pub params: Map<String, Value>,
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub edge_orbits: Option<Vec<Vec<usize>>>,
    pub transitive: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_repeats_and_disconnected() {
        let tag = FamilyTag::new("custom", Value::Null);
        assert!(Graph::from_edges(2, vec![(0, 0)], None, false, tag.clone()).is_err());
        assert!(Graph::from_edges(2, vec![(0, 1), (1, 0)], None, false, tag.clone()).is_err());
        assert!(Graph::from_edges(3, vec![(0, 1)], None, false, tag.clone()).is_err());
        assert!(Graph::from_edges(2, vec![(0, 1)], Some(vec![vec![0], vec![0]]), false, tag.clone()).is_err());
        assert!(Graph::from_edges(3, vec![(0, 1), (1, 2)], None, true, tag).is_err());
    }
}
