use serde::{Deserialize, Serialize};

use super::Configuration;
use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::unionfind::UnionFind;

/// Partition of the vertex set into open clusters.
///
/// Cluster ids are assigned in order of each cluster's smallest vertex, so
/// equal-size clusters are ranked by smallest contained vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDecomposition {
    /// Cluster id of every vertex.
    pub representative: Vec<u32>,
    /// Size of cluster `id`.
    pub cluster_sizes: Vec<usize>,
    /// All cluster sizes, descending.
    pub sizes: Vec<usize>,
    pub k1: usize,
    pub k2: usize,
    pub k1_density: f64,
    pub k2_density: f64,
    /// Id of the largest cluster (ties: smallest vertex).
    pub k1_id: u32,
    /// Id of the second largest cluster, if there are at least two.
    pub k2_id: Option<u32>,
}

impl ClusterDecomposition {
    pub(crate) fn from_union_find(uf: &mut UnionFind) -> Self {
        let n = uf.len();
        let mut id_of_root = vec![u32::MAX; n];
        let mut representative = vec![0u32; n];
        let mut cluster_sizes = Vec::new();
        for v in 0..n {
            let r = uf.find(v);
            if id_of_root[r] == u32::MAX {
                id_of_root[r] = cluster_sizes.len() as u32;
                cluster_sizes.push(0);
            }
            let id = id_of_root[r];
            representative[v] = id;
            cluster_sizes[id as usize] += 1;
        }
        let mut order: Vec<u32> = (0..cluster_sizes.len() as u32).collect();
        order.sort_by(|&a, &b| cluster_sizes[b as usize].cmp(&cluster_sizes[a as usize]).then(a.cmp(&b)));
        let sizes: Vec<usize> = order.iter().map(|&i| cluster_sizes[i as usize]).collect();
        let k1 = sizes[0];
        let k2 = sizes.get(1).copied().unwrap_or(0);
        ClusterDecomposition {
            representative,
            k1,
            k2,
            k1_density: k1 as f64 / n as f64,
            k2_density: k2 as f64 / n as f64,
            k1_id: order[0],
            k2_id: order.get(1).copied(),
            cluster_sizes,
            sizes,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.representative.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.representative[u] == self.representative[v]
    }

    pub fn cluster_of(&self, v: usize) -> Vec<usize> {
        let id = self.representative[v];
        (0..self.n_vertices()).filter(|&w| self.representative[w] == id).collect()
    }

    pub fn cluster_size_of(&self, v: usize) -> usize {
        self.cluster_sizes[self.representative[v] as usize]
    }

    /// `max_K |K ∩ Λ|` over clusters `K`.
    pub fn largest_intersection(&self, lambda: &[usize]) -> Result<usize> {
        if lambda.is_empty() {
            return Err(invalid("Λ must be nonempty"));
        }
        let mut hits = vec![0usize; self.n_clusters()];
        let mut seen = vec![false; self.n_vertices()];
        for &v in lambda {
            if v >= self.n_vertices() {
                return Err(invalid(format!("vertex {v} out of range")));
            }
            if !std::mem::replace(&mut seen[v], true) {
                hits[self.representative[v] as usize] += 1;
            }
        }
        Ok(hits.into_iter().max().unwrap_or(0))
    }
}

/// Connected components of the open subgraph of `omega`.
pub fn clusters(g: &Graph, omega: &Configuration) -> Result<ClusterDecomposition> {
    if !omega.matches(g) {
        return Err(Error::ContractViolation(format!(
            "configuration over {} edges does not match graph with {} edges",
            omega.n_edges(),
            g.n_edges()
        )));
    }
    let mut uf = UnionFind::new(g.n_vertices());
    for e in omega.iter_open() {
        let (u, v) = g.edge(e);
        uf.union(u, v);
    }
    Ok(ClusterDecomposition::from_union_find(&mut uf))
}

pub fn connected(g: &Graph, omega: &Configuration, u: usize, v: usize) -> Result<bool> {
    Ok(clusters(g, omega)?.connected(u, v))
}

pub fn cluster_of(g: &Graph, omega: &Configuration, v: usize) -> Result<Vec<usize>> {
    Ok(clusters(g, omega)?.cluster_of(v))
}

pub fn largest_intersection(g: &Graph, omega: &Configuration, lambda: &[usize]) -> Result<usize> {
    clusters(g, omega)?.largest_intersection(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle};

    #[test]
    fn closed_cycle_is_all_singletons() {
        let g = cycle(5).unwrap();
        let cd = clusters(&g, &Configuration::closed(&g)).unwrap();
        assert_eq!(cd.sizes, vec![1; 5]);
        assert_eq!((cd.k1, cd.k2), (1, 1));
    }

    #[test]
    fn adjacent_edges_on_c4() {
        let g = cycle(4).unwrap();
        let cd = clusters(&g, &Configuration::from_open_edges(&g, [0, 1])).unwrap();
        assert_eq!((cd.k1, cd.k2), (3, 1));
        assert_eq!(cd.k1_density, 0.75);
    }

    #[test]
    fn perfect_matching_on_k4_ties_by_smallest_vertex() {
        let g = complete(4).unwrap();
        let a = g.edge_index(0, 1).unwrap();
        let b = g.edge_index(2, 3).unwrap();
        let cd = clusters(&g, &Configuration::from_open_edges(&g, [b, a])).unwrap();
        assert_eq!((cd.k1, cd.k2), (2, 2));
        assert_eq!(cd.representative[0], cd.k1_id);
        assert_eq!(Some(cd.representative[2]), cd.k2_id);
    }

    #[test]
    fn accessors() {
        let g = cycle(6).unwrap();
        let closed = Configuration::closed(&g);
        assert!(connected(&g, &closed, 2, 2).unwrap());
        assert!(!connected(&g, &closed, 0, 1).unwrap());
        let one = Configuration::from_open_edges(&g, [0]);
        let (u, v) = g.edge(0);
        assert!(connected(&g, &one, u, v).unwrap());
        assert_eq!(cluster_of(&g, &one, u).unwrap(), vec![0, 1]);
    }

    #[test]
    fn largest_intersection_cases() {
        let g = cycle(6).unwrap();
        let all: Vec<usize> = (0..6).collect();
        let omega = Configuration::from_open_edges(&g, [0, 1, 3]);
        let cd = clusters(&g, &omega).unwrap();
        assert_eq!(cd.largest_intersection(&all).unwrap(), cd.k1);
        let closed = clusters(&g, &Configuration::closed(&g)).unwrap();
        assert_eq!(closed.largest_intersection(&all).unwrap(), 1);
        assert_eq!(cd.largest_intersection(&[4]).unwrap(), 1);
        assert!(cd.largest_intersection(&[]).is_err());
    }

    #[test]
    fn mismatched_configuration_is_rejected() {
        let g = cycle(5).unwrap();
        let h = cycle(6).unwrap();
        assert!(matches!(clusters(&g, &Configuration::closed(&h)), Err(Error::ContractViolation(_))));
    }
}
