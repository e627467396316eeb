use serde::{Deserialize, Serialize};

use super::{boundary_size, degree_share, dense_check, DenseCheck, SeparatorResult};
use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::unionfind::UnionFind;

/// Cap on the number of orbit subsets examined.
pub const MAX_ORBIT_SUBSETS: u64 = 1 << 18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolecularReport {
    pub m: usize,
    /// Indices into the graph's edge orbits.
    pub removed_orbits: Vec<usize>,
    pub f_size: usize,
    pub c_ratio: f64,
    pub components_equal_size: bool,
    /// Density ratios; molecules are dense by definition, which a single
    /// graph cannot certify.
    pub density: DenseCheck,
    /// False when the orbit subset space exceeded [`MAX_ORBIT_SUBSETS`].
    pub exhaustive: bool,
}

/// Component id per vertex and component count after deleting `removed`
/// edges; ids follow smallest vertex.
fn components_without(g: &Graph, removed: &[bool]) -> (Vec<usize>, usize, usize) {
    let mut uf = UnionFind::new(g.n_vertices());
    let mut remaining = 0;
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if !removed[e] {
            uf.union(u as usize, v as usize);
            remaining += 1;
        }
    }
    let mut id = vec![usize::MAX; g.n_vertices()];
    let mut root_id = vec![usize::MAX; g.n_vertices()];
    let mut m = 0;
    for v in 0..g.n_vertices() {
        let r = uf.find(v);
        if root_id[r] == usize::MAX {
            root_id[r] = m;
            m += 1;
        }
        id[v] = root_id[r];
    }
    (id, m, remaining)
}

fn removal_mask(g: &Graph, orbits: &[Vec<usize>], chosen: &[usize]) -> Vec<bool> {
    let mut removed = vec![false; g.n_edges()];
    for &o in chosen {
        for &e in &orbits[o] {
            removed[e] = true;
        }
    }
    removed
}

/// Component ids and count after removing the given orbits.
pub fn components_after_removal(g: &Graph, removed_orbits: &[usize]) -> Result<(Vec<usize>, usize)> {
    let orbits = g.edge_orbits().ok_or_else(|| Error::UnsupportedGraph("graph declares no edge orbits".into()))?;
    if removed_orbits.iter().any(|&o| o >= orbits.len()) {
        return Err(invalid("orbit index out of range"));
    }
    let (id, m, _) = components_without(g, &removal_mask(g, orbits, removed_orbits));
    Ok((id, m))
}

/// Searches unions of declared edge orbits `F` with `|F| ≤ C|V|` whose
/// removal leaves between 2 and `m_max` components and at least one edge.
/// Returns the smallest such `m`; ties go to smaller `|F|`, then to the
/// first subset in enumeration order.
pub fn molecular_search(g: &Graph, c: f64, m_max: usize) -> Result<Option<MolecularReport>> {
    let orbits = g.edge_orbits().ok_or_else(|| Error::UnsupportedGraph("graph declares no edge orbits".into()))?;
    if !(c > 0.0) || m_max < 2 {
        return Err(invalid("need C > 0 and m_max ≥ 2"));
    }
    let k = orbits.len();
    let limit = c * g.n_vertices() as f64;
    let total = if k >= 63 { u64::MAX } else { 1u64 << k };
    let exhaustive = total <= MAX_ORBIT_SUBSETS;
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    // Subsets enumerated by size, so the cap keeps the smallest removals.
    let mut examined = 0u64;
    'sizes: for size in 1..=k {
        let mut chosen: Vec<usize> = (0..size).collect();
        loop {
            examined += 1;
            if examined > MAX_ORBIT_SUBSETS {
                break 'sizes;
            }
            let f_size: usize = chosen.iter().map(|&o| orbits[o].len()).sum();
            if f_size as f64 <= limit + 1e-9 {
                let (_, m, remaining) = components_without(g, &removal_mask(g, orbits, &chosen));
                if (2..=m_max).contains(&m) && remaining > 0 && best.as_ref().is_none_or(|b| (m, f_size) < (b.0, b.1)) {
                    best = Some((m, f_size, chosen.clone()));
                }
            }
            // Next combination in lexicographic order.
            let mut i = size;
            while i > 0 && chosen[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            chosen[i - 1] += 1;
            for j in i..size {
                chosen[j] = chosen[j - 1] + 1;
            }
        }
    }
    Ok(best.map(|(m, f_size, removed_orbits)| {
        let (id, _, _) = components_without(g, &removal_mask(g, orbits, &removed_orbits));
        let mut sizes = vec![0usize; m];
        for &i in &id {
            sizes[i] += 1;
        }
        MolecularReport {
            m,
            removed_orbits,
            f_size,
            c_ratio: f_size as f64 / g.n_vertices() as f64,
            components_equal_size: sizes.iter().all(|&s| s == sizes[0]),
            density: dense_check(g),
            exhaustive,
        }
    }))
}

/// Balanced cut from a decomposition: `A` is the union of the first
/// `⌈m/2⌉` components (by smallest vertex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub witness: SeparatorResult,
    pub f_size: usize,
    pub balanced: bool,
    /// `balanced` and `cut_size ≤ |F|`.
    pub holds: bool,
}

pub fn molecular_witness(g: &Graph, report: &MolecularReport, theta: f64) -> Result<WitnessCheck> {
    let (id, m) = components_after_removal(g, &report.removed_orbits)?;
    if m != report.m {
        return Err(Error::ContractViolation(format!("report claims {} components, recount gives {m}", report.m)));
    }
    let take = m.div_ceil(2);
    let side_a: Vec<usize> = (0..g.n_vertices()).filter(|&v| id[v] < take).collect();
    let cut_size = boundary_size(g, &side_a);
    let share = degree_share(g, &side_a);
    let balanced = share >= theta - 1e-12 && share <= 1.0 - theta + 1e-12;
    Ok(WitnessCheck {
        holds: balanced && cut_size <= report.f_size,
        witness: SeparatorResult { theta, cut_size, side_a, exact: false, degree_weighted_share: share },
        f_size: report.f_size,
        balanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cartesian_product, complete, molecular_chain, torus};

    #[test]
    fn bridge_orbit_of_kn_box_k2() {
        let g = cartesian_product(&complete(20).unwrap(), &complete(2).unwrap()).unwrap();
        let r = molecular_search(&g, 2.0, 8).unwrap().unwrap();
        assert_eq!(r.m, 2);
        assert_eq!(r.f_size, 20);
        assert!(r.components_equal_size && r.exhaustive);
        assert_eq!(components_after_removal(&g, &r.removed_orbits).unwrap().1, 2);
        let w = molecular_witness(&g, &r, 1.0 / 3.0).unwrap();
        assert!(w.holds, "{w:?}");
        assert_eq!(w.witness.cut_size, 20);
    }

    #[test]
    fn torus_axis_orbit_splits_into_cycles() {
        let g = torus(&[16, 16]).unwrap();
        let r = molecular_search(&g, 4.0, 64).unwrap().unwrap();
        assert_eq!(r.m, 16);
        assert_eq!(r.f_size, 256);
        assert!(!r.density.dense);
        assert!(molecular_search(&g, 4.0, 8).unwrap().is_none());
    }

    #[test]
    fn complete_graph_has_no_decomposition() {
        assert!(molecular_search(&complete(30).unwrap(), 4.0, 8).unwrap().is_none());
    }

    #[test]
    fn missing_orbits_is_unsupported() {
        let g = molecular_chain(8, 0.3).unwrap();
        if g.edge_orbits().is_none() {
            assert!(matches!(molecular_search(&g, 1.0, 4), Err(Error::UnsupportedGraph(_))));
        }
    }
}
