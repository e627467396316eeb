//! Constructors for the graph families used throughout the crate.
//!
//! Vertex indices of product-type graphs are row-major: coordinate `x` of a
//! graph with moduli `[m_0, .., m_{k-1}]` has index
//! `((x_0·m_1 + x_1)·m_2 + ..)`. Edges are listed generator by generator
//! (axis by axis), and within a generator by base vertex index.

use std::collections::HashSet;

use serde_json::json;

use super::{FamilyTag, Graph};
use crate::error::{invalid, Error, Result};

pub const MAX_HYPERCUBE_DIM: usize = 24;

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(invalid(format!("cycle needs n >= 3, got {n}")));
    }
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, edges, Some(vec![(0..n).collect()]), true, FamilyTag::new("cycle", json!({ "n": n })))
}

/// Product of cycles. A length-2 factor contributes one edge per pair, not
/// a doubled one.
pub fn torus(dims: &[usize]) -> Result<Graph> {
    if dims.is_empty() {
        return Err(invalid("torus needs at least one dimension"));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(invalid(format!("torus dimensions must be >= 2, got {d}")));
    }
    let n = checked_product(dims)?;
    if dims.len() == 1 && dims[0] == 2 {
        // Z/2Z alone is a single edge.
        return Graph::from_edges(2, vec![(0, 1)], Some(vec![vec![0]]), true, FamilyTag::new("torus", json!({ "dims": dims })));
    }
    let strides = strides(dims);
    let mut edges = Vec::new();
    let mut orbits = Vec::new();
    for (axis, &m) in dims.iter().enumerate() {
        let start = edges.len();
        for x in 0..n {
            let coord = (x / strides[axis]) % m;
            if m == 2 && coord == 1 {
                continue;
            }
            let next = x - coord * strides[axis] + ((coord + 1) % m) * strides[axis];
            edges.push((x, next));
        }
        orbits.push((start..edges.len()).collect());
    }
    Graph::from_edges(n, edges, Some(orbits), true, FamilyTag::new("torus", json!({ "dims": dims })))
}

pub fn hypercube(d: usize) -> Result<Graph> {
    if d < 1 {
        return Err(invalid("hypercube needs d >= 1"));
    }
    if d > MAX_HYPERCUBE_DIM {
        return Err(Error::SizeLimit { what: "hypercube dimension", value: d, limit: MAX_HYPERCUBE_DIM });
    }
    let n = 1usize << d;
    let mut edges = Vec::with_capacity(d * n / 2);
    for bit in 0..d {
        for v in 0..n {
            if v & (1 << bit) == 0 {
                edges.push((v, v | (1 << bit)));
            }
        }
    }
    let all = (0..edges.len()).collect();
    Graph::from_edges(n, edges, Some(vec![all]), true, FamilyTag::new("hypercube", json!({ "d": d })))
}

pub fn complete(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(invalid(format!("complete graph needs n >= 2, got {n}")));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            edges.push((i, j));
        }
    }
    let all = (0..edges.len()).collect();
    Graph::from_edges(n, edges, Some(vec![all]), true, FamilyTag::new("complete", json!({ "n": n })))
}

/// Cartesian product `G □ H`. Vertex `(g, h)` has index `g·|V(H)| + h`.
/// Edges: every `G`-edge at every `H`-vertex, then every `H`-edge at every
/// `G`-vertex. Orbits are lifted factorwise when both factors declare them.
pub fn cartesian_product(g: &Graph, h: &Graph) -> Result<Graph> {
    let (ng, nh) = (g.n_vertices(), h.n_vertices());
    let n = ng.checked_mul(nh).ok_or(Error::SizeLimit { what: "product vertices", value: usize::MAX, limit: u32::MAX as usize })?;
    let mut edges = Vec::with_capacity(g.n_edges() * nh + h.n_edges() * ng);
    for &(u, v) in g.edges() {
        for y in 0..nh {
            edges.push((u as usize * nh + y, v as usize * nh + y));
        }
    }
    for x in 0..ng {
        for &(u, v) in h.edges() {
            edges.push((x * nh + u as usize, x * nh + v as usize));
        }
    }
    let orbits = match (g.edge_orbits(), h.edge_orbits()) {
        (Some(og), Some(oh)) => {
            let mut out: Vec<Vec<usize>> = Vec::new();
            for class in og {
                out.push(class.iter().flat_map(|&e| (0..nh).map(move |y| e * nh + y)).collect());
            }
            let base = g.n_edges() * nh;
            let mh = h.n_edges();
            for class in oh {
                out.push(class.iter().flat_map(|&e| (0..ng).map(move |x| base + x * mh + e)).collect());
            }
            for class in &mut out {
                class.sort_unstable();
            }
            Some(out)
        }
        _ => None,
    };
    let tag = FamilyTag::new(
        "cartesian_product",
        json!({ "left": g.family(), "right": h.family() }),
    );
    Graph::from_edges(n, edges, orbits, g.is_transitive() && h.is_transitive(), tag)
}

/// Cayley graph of `Z/m_0 × .. × Z/m_{k-1}` with generators `±g`.
pub fn abelian_cayley(moduli: &[usize], generators: &[Vec<i64>]) -> Result<Graph> {
    if moduli.is_empty() || moduli.iter().any(|&m| m < 2) {
        return Err(invalid("moduli must be nonempty and each >= 2"));
    }
    if generators.is_empty() {
        return Err(invalid("need at least one generator"));
    }
    let n = checked_product(moduli)?;
    let strides = strides(moduli);
    let reduce = |g: &[i64]| -> Vec<usize> {
        g.iter().zip(moduli).map(|(&c, &m)| c.rem_euclid(m as i64) as usize).collect()
    };
    let mut seen_gens: HashSet<Vec<usize>> = HashSet::new();
    let mut edges = Vec::new();
    let mut edge_set = HashSet::new();
    let mut orbits = Vec::new();
    for g in generators {
        if g.len() != moduli.len() {
            return Err(invalid("generator length must match the number of moduli"));
        }
        let r = reduce(g);
        if r.iter().all(|&c| c == 0) {
            return Err(invalid(format!("generator {g:?} is zero modulo the moduli")));
        }
        let neg: Vec<usize> = r.iter().zip(moduli).map(|(&c, &m)| (m - c) % m).collect();
        if !seen_gens.insert(r.clone()) || (neg != r && !seen_gens.insert(neg.clone())) {
            return Err(invalid(format!("generator {g:?} coincides with an earlier one up to sign")));
        }
        let start = edges.len();
        for x in 0..n {
            let mut y = 0;
            for (axis, &m) in moduli.iter().enumerate() {
                let c = (x / strides[axis]) % m;
                y += ((c + r[axis]) % m) * strides[axis];
            }
            let key = (x.min(y), x.max(y));
            if edge_set.contains(&key) {
                continue;
            }
            edge_set.insert(key);
            edges.push((x, y));
        }
        orbits.push((start..edges.len()).collect());
    }
    Graph::from_edges(
        n,
        edges,
        Some(orbits),
        true,
        FamilyTag::new("abelian_cayley", json!({ "moduli": moduli, "generators": generators })),
    )
}

/// Blocks `[K_2n, K_n, K_n, K_2n]` in a line. Every vertex of a block is
/// joined to `w = ⌈n^α⌉` cyclically consecutive vertices of each adjacent
/// block: vertex `i` of the larger (or, for equal sizes, the left) block is
/// joined to vertices `(i + t) mod |other|`, `t < w`.
pub fn molecular_chain(n: usize, alpha: f64) -> Result<Graph> {
    if n < 4 {
        return Err(invalid(format!("molecular chain needs n >= 4, got {n}")));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(invalid(format!("molecular chain needs alpha in (0, 1/2), got {alpha}")));
    }
    let window = (n as f64).powf(alpha).ceil() as usize;
    if window >= n {
        return Err(invalid(format!("window {window} is not smaller than block size {n}")));
    }
    let sizes = [2 * n, n, n, 2 * n];
    let mut starts = [0usize; 4];
    for i in 1..4 {
        starts[i] = starts[i - 1] + sizes[i - 1];
    }
    let total = starts[3] + sizes[3];
    let mut edges = Vec::new();
    for b in 0..4 {
        for i in 0..sizes[b] {
            for j in i + 1..sizes[b] {
                edges.push((starts[b] + i, starts[b] + j));
            }
        }
    }
    for b in 0..3 {
        let (big, small) = if sizes[b] >= sizes[b + 1] { (b, b + 1) } else { (b + 1, b) };
        for i in 0..sizes[big] {
            for t in 0..window {
                edges.push((starts[big] + i, starts[small] + (i + t) % sizes[small]));
            }
        }
    }
    Graph::from_edges(
        total,
        edges,
        None,
        false,
        FamilyTag::new("molecular_chain", json!({ "n": n, "alpha": alpha, "window": window })),
    )
}

/// Two paths on `k` vertices each (`0..k` and `k..2k`), joined by the
/// bridge `(k-1, k)`. The bridge is the last edge.
pub fn path_pair(k: usize) -> Result<Graph> {
    if k < 1 {
        return Err(invalid("path pair needs k >= 1"));
    }
    let mut edges = Vec::new();
    for half in 0..2 {
        for i in 0..k - 1 {
            edges.push((half * k + i, half * k + i + 1));
        }
    }
    edges.push((k - 1, k));
    Graph::from_edges(2 * k, edges, None, false, FamilyTag::new("path_pair", json!({ "k": k })))
}

/// Index of the bridge edge of [`path_pair`].
pub fn path_pair_bridge(g: &Graph) -> usize {
    g.n_edges() - 1
}

fn checked_product(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .filter(|&n| n <= u32::MAX as usize)
        .ok_or(Error::SizeLimit { what: "vertex count", value: usize::MAX, limit: u32::MAX as usize })
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_degrees(g: &Graph) -> Vec<usize> {
        let mut d = g.degrees();
        d.sort_unstable();
        d
    }

    #[test]
    fn cycles() {
        let k3 = cycle(3).unwrap();
        assert_eq!((k3.n_vertices(), k3.n_edges(), k3.degree(0)), (3, 3, 2));
        assert_eq!(cycle(4).unwrap().diameter().unwrap().exact(), Some(2));
        let c10 = cycle(10).unwrap();
        assert_eq!(c10.edge_orbits().unwrap().len(), 1);
        assert_eq!(c10.edge_orbits().unwrap()[0].len(), 10);
        assert_eq!(c10.diameter().unwrap().exact(), Some(5));
        assert!(matches!(cycle(2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn tori() {
        let t = torus(&[4, 4]).unwrap();
        assert_eq!((t.n_vertices(), t.n_edges(), t.degree(0)), (16, 32, 4));
        let orbits = t.edge_orbits().unwrap();
        assert_eq!(orbits.len(), 2);
        assert!(orbits.iter().all(|o| o.len() == 16));
        assert_eq!(t.diameter().unwrap().exact(), Some(4));
        assert_eq!(torus(&[3]).unwrap().edges(), cycle(3).unwrap().edges());
        assert_eq!(torus(&[64, 6]).unwrap().n_vertices(), 384);
        let t2 = torus(&[2, 5]).unwrap();
        assert_eq!(t2.degree(0), 3);
        assert_eq!(t2.n_edges(), 5 + 10);
        assert!(torus(&[4, 1]).is_err());
    }

    #[test]
    fn hypercubes() {
        let q1 = hypercube(1).unwrap();
        assert_eq!((q1.n_vertices(), q1.n_edges()), (2, 1));
        let q3 = hypercube(3).unwrap();
        assert_eq!((q3.n_vertices(), q3.n_edges()), (8, 12));
        assert_eq!(q3.diameter().unwrap().exact(), Some(3));
        let q10 = hypercube(10).unwrap();
        assert_eq!((q10.n_vertices(), q10.n_edges()), (1024, 5120));
        assert!(matches!(hypercube(0), Err(Error::InvalidParameter(_))));
        assert!(matches!(hypercube(25), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn complete_graphs() {
        assert_eq!(complete(2).unwrap().n_edges(), 1);
        assert_eq!(complete(4).unwrap().n_edges(), 6);
        let k100 = complete(100).unwrap();
        assert_eq!((k100.n_edges(), k100.degree(7)), (4950, 99));
        assert_eq!(k100.diameter().unwrap().exact(), Some(1));
    }

    #[test]
    fn products() {
        let prism = cartesian_product(&complete(3).unwrap(), &complete(2).unwrap()).unwrap();
        assert_eq!((prism.n_vertices(), prism.n_edges()), (6, 9));

        let c4c4 = cartesian_product(&cycle(4).unwrap(), &cycle(4).unwrap()).unwrap();
        let t = torus(&[4, 4]).unwrap();
        assert_eq!(c4c4.n_vertices(), t.n_vertices());
        assert_eq!(c4c4.n_edges(), t.n_edges());
        assert_eq!(sorted_degrees(&c4c4), sorted_degrees(&t));

        let k20k2 = cartesian_product(&complete(20).unwrap(), &complete(2).unwrap()).unwrap();
        let orbits = k20k2.edge_orbits().unwrap();
        assert_eq!(orbits.len(), 2);
        assert_eq!(orbits[1].len(), 20);
        for &e in &orbits[1] {
            let (u, v) = k20k2.edge(e);
            assert_eq!(u / 2, v / 2, "bridge joins the two copies of one K_20 vertex");
        }
        assert!(k20k2.is_transitive());
    }

    #[test]
    fn cayley_graphs() {
        assert_eq!(abelian_cayley(&[7], &[vec![1]]).unwrap().edges(), cycle(7).unwrap().edges());
        let circ = abelian_cayley(&[5], &[vec![1], vec![2]]).unwrap();
        assert_eq!((circ.n_edges(), circ.degree(0)), (10, 4));
        let t = abelian_cayley(&[4, 4], &[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(t.edges(), torus(&[4, 4]).unwrap().edges());
        assert!(abelian_cayley(&[5], &[vec![5]]).is_err());
        assert!(abelian_cayley(&[5], &[vec![1], vec![4]]).is_err());
        assert!(abelian_cayley(&[6], &[vec![2]]).is_err(), "disconnected");
    }

    #[test]
    fn chain_counts() {
        let g = molecular_chain(8, 0.3).unwrap();
        assert_eq!(g.n_vertices(), 48);
        assert!(!g.is_transitive());
        assert!(g.edge_orbits().is_none());
        // K_8 blocks occupy 16..24 and 24..32.
        let between = g
            .edges()
            .iter()
            .filter(|&&(u, v)| (16..24).contains(&u) && (24..32).contains(&v))
            .count();
        assert_eq!(between, 16);
        assert!(molecular_chain(3, 0.3).is_err());
        assert!(molecular_chain(8, 0.6).is_err());
    }

    #[test]
    fn path_pair_gadget() {
        let g = path_pair(5).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (10, 9));
        assert_eq!(g.edge(path_pair_bridge(&g)), (4, 5));
    }
}
