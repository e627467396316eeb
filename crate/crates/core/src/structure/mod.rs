//! Balanced separators, molecular decompositions from edge orbits, and
//! density ratios.

mod molecular;
mod separator;

pub use molecular::*;
pub use separator::*;

use serde::{Deserialize, Serialize};

use crate::graphs::Graph;

/// Finite-size hint for [`DenseCheck::dense`]. Density is a property of a
/// sequence, so this only flags single graphs whose minimum degree is a
/// visible fraction of `|V|`.
pub const DENSE_DEGREE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseCheck {
    /// `|E| / |V|²`.
    pub edge_density: f64,
    /// Minimum degree over `|V|`.
    pub degree_ratio: f64,
    /// `degree_ratio ≥ DENSE_DEGREE_RATIO`.
    pub dense: bool,
}

pub fn dense_check(g: &Graph) -> DenseCheck {
    let n = g.n_vertices() as f64;
    let degree_ratio = g.min_degree() as f64 / n;
    DenseCheck { edge_density: g.n_edges() as f64 / (n * n), degree_ratio, dense: degree_ratio >= DENSE_DEGREE_RATIO }
}

/// `|∂_E A|`, counted edge by edge.
pub fn boundary_size(g: &Graph, side_a: &[usize]) -> usize {
    let mut inside = vec![false; g.n_vertices()];
    for &v in side_a {
        inside[v] = true;
    }
    g.edges().iter().filter(|&&(u, v)| inside[u as usize] != inside[v as usize]).count()
}

/// `Σ_{v∈A} deg(v) / Σ_v deg(v)`.
pub fn degree_share(g: &Graph, side_a: &[usize]) -> f64 {
    let a: usize = side_a.iter().map(|&v| g.degree(v)).sum();
    a as f64 / (2 * g.n_edges()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, hypercube};

    #[test]
    fn density_ratios() {
        let d = dense_check(&complete(10).unwrap());
        assert!((d.edge_density - 9.0 / 20.0).abs() < 1e-12);
        assert!(d.dense);
        let d = dense_check(&cycle(100).unwrap());
        assert!((d.edge_density - 0.01).abs() < 1e-12);
        assert!(!d.dense);
        let d = dense_check(&hypercube(10).unwrap());
        assert!((d.edge_density - 5120.0 / (1024.0 * 1024.0)).abs() < 1e-15);
    }

    #[test]
    fn boundary_and_share() {
        let g = cycle(6).unwrap();
        assert_eq!(boundary_size(&g, &[0, 1, 2]), 2);
        assert_eq!(boundary_size(&g, &[0, 2, 4]), 6);
        assert!((degree_share(&g, &[0, 1]) - 1.0 / 3.0).abs() < 1e-12);
    }
}
