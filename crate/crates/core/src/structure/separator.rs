use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{boundary_size, degree_share};
use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::rng::{tags, StreamKey};

/// Largest vertex count for exhaustive bipartition search.
pub const MAX_EXACT_SEPARATOR_VERTICES: usize = 24;
pub const HEURISTIC_RESTARTS: u64 = 32;
/// Low bits enumerated sequentially per parallel block.
const BLOCK_BITS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparatorMode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorResult {
    pub theta: f64,
    pub cut_size: usize,
    /// Sorted vertex indices.
    pub side_a: Vec<usize>,
    pub exact: bool,
    pub degree_weighted_share: f64,
}

/// Integer window `[lo, hi]` for `Σ_{v∈A} deg(v)`.
fn balance_window(g: &Graph, theta: f64) -> Result<(usize, usize)> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(invalid(format!("θ must lie in (0, 1/2], got {theta}")));
    }
    let total = (2 * g.n_edges()) as f64;
    let lo = (theta * total - 1e-9).ceil().max(1.0) as usize;
    let hi = ((1.0 - theta) * total + 1e-9).floor() as usize;
    if lo > hi {
        return Err(invalid(format!("no degree share lies in [{theta}, {}]", 1.0 - theta)));
    }
    Ok((lo, hi))
}

fn result(g: &Graph, theta: f64, side: &[bool], cut: usize, exact: bool) -> SeparatorResult {
    let side_a: Vec<usize> = (0..g.n_vertices()).filter(|&v| side[v]).collect();
    let recount = boundary_size(g, &side_a);
    assert_eq!(recount, cut, "incremental cut size disagrees with a direct boundary count");
    SeparatorResult { theta, cut_size: cut, degree_weighted_share: degree_share(g, &side_a), side_a, exact }
}

/// `side`, neighbour counts inside `A`, `Σ_A deg` and the cut, updated per
/// single-vertex move.
struct Partition {
    side: Vec<bool>,
    in_a: Vec<u32>,
    deg_a: usize,
    cut: usize,
}

impl Partition {
    fn empty(n: usize) -> Self {
        Partition { side: vec![false; n], in_a: vec![0; n], deg_a: 0, cut: 0 }
    }

    fn delta(&self, g: &Graph, v: usize) -> i64 {
        let inside = self.in_a[v] as i64;
        let deg = g.degree(v) as i64;
        if self.side[v] {
            2 * inside - deg
        } else {
            deg - 2 * inside
        }
    }

    fn deg_after(&self, g: &Graph, v: usize) -> usize {
        if self.side[v] {
            self.deg_a - g.degree(v)
        } else {
            self.deg_a + g.degree(v)
        }
    }

    fn flip(&mut self, g: &Graph, v: usize) {
        self.cut = (self.cut as i64 + self.delta(g, v)) as usize;
        self.deg_a = self.deg_after(g, v);
        let entering = !self.side[v];
        self.side[v] = entering;
        for &(u, _) in g.neighbors(v) {
            if entering {
                self.in_a[u as usize] += 1;
            } else {
                self.in_a[u as usize] -= 1;
            }
        }
    }
}

/// Exhaustive search. Vertex `n-1` is pinned to the `B` side (the problem is
/// symmetric under complement); the remaining masks are split into aligned
/// blocks, each walked in Gray-code order.
fn exact_separator(g: &Graph, theta: f64) -> Result<SeparatorResult> {
    let n = g.n_vertices();
    if n > MAX_EXACT_SEPARATOR_VERTICES {
        return Err(Error::SizeLimit { what: "exact separator vertices", value: n, limit: MAX_EXACT_SEPARATOR_VERTICES });
    }
    let (lo, hi) = balance_window(g, theta)?;
    let free = n - 1;
    let low = free.min(BLOCK_BITS);
    let blocks = 1u64 << (free - low);
    let best = (0..blocks)
        .into_par_iter()
        .filter_map(|b| {
            let prefix = b << low;
            let mut part = Partition::empty(n);
            for v in low..free {
                if prefix >> v & 1 == 1 {
                    part.flip(g, v);
                }
            }
            let mut best: Option<(usize, u64)> = None;
            let mut mask = prefix;
            for i in 0u64..1 << low {
                if i > 0 {
                    let v = i.trailing_zeros() as usize;
                    part.flip(g, v);
                    mask ^= 1 << v;
                }
                if part.deg_a >= lo && part.deg_a <= hi && best.is_none_or(|bb| (part.cut, mask) < bb) {
                    best = Some((part.cut, mask));
                }
            }
            best
        })
        .min();
    let (cut, mask) = best.ok_or_else(|| invalid("no bipartition meets the balance window"))?;
    let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
    Ok(result(g, theta, &side, cut, true))
}

/// A feasible start: grow a BFS ball from a random vertex, skipping vertices
/// that would overshoot, then fall back to a random order.
fn initial_partition<R: Rng + ?Sized>(g: &Graph, lo: usize, hi: usize, rng: &mut R) -> Option<Partition> {
    let n = g.n_vertices();
    let start = rng.random_range(0..n);
    let dist = g.bfs(start);
    let mut by_distance: Vec<usize> = (0..n).collect();
    by_distance.shuffle(rng);
    by_distance.sort_by_key(|&v| dist[v]);
    let mut random: Vec<usize> = (0..n).collect();
    random.shuffle(rng);
    for order in [by_distance, random] {
        let mut part = Partition::empty(n);
        for v in order {
            if part.deg_a >= lo {
                break;
            }
            if part.deg_a + g.degree(v) <= hi {
                part.flip(g, v);
            }
        }
        if part.deg_a >= lo {
            return Some(part);
        }
    }
    None
}

/// Simulated annealing over single-vertex moves that stay inside the window,
/// finished by greedy descent. Returns the best partition seen.
fn anneal<R: Rng + ?Sized>(g: &Graph, lo: usize, hi: usize, moves: u64, rng: &mut R) -> Option<(usize, Vec<bool>)> {
    let n = g.n_vertices();
    let mut part = initial_partition(g, lo, hi, rng)?;
    let mut best = (part.cut, part.side.clone());
    let t0 = 1.0 + 0.25 * g.mean_degree();
    let t1 = 0.05f64;
    let cooling = (t1 / t0).powf(1.0 / moves.max(1) as f64);
    let mut t = t0;
    for _ in 0..moves {
        let v = rng.random_range(0..n);
        let after = part.deg_after(g, v);
        if after >= lo && after <= hi {
            let d = part.delta(g, v);
            if d <= 0 || rng.random::<f64>() < (-(d as f64) / t).exp() {
                part.flip(g, v);
                if part.cut < best.0 {
                    best = (part.cut, part.side.clone());
                }
            }
        }
        t *= cooling;
    }
    let mut part = {
        let mut p = Partition::empty(n);
        for v in (0..n).filter(|&v| best.1[v]) {
            p.flip(g, v);
        }
        p
    };
    loop {
        let mut improved = false;
        for v in 0..n {
            let after = part.deg_after(g, v);
            if after >= lo && after <= hi && part.delta(g, v) < 0 {
                part.flip(g, v);
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Some((part.cut, part.side))
}

fn heuristic_separator(g: &Graph, theta: f64, budget: Option<u64>, seed: u64) -> Result<SeparatorResult> {
    let (lo, hi) = balance_window(g, theta)?;
    let moves = budget.unwrap_or(400 * g.n_vertices() as u64);
    let key = StreamKey::new(seed).derive(tags::SEPARATOR);
    let best = (0..HEURISTIC_RESTARTS)
        .into_par_iter()
        .filter_map(|r| anneal(g, lo, hi, moves, &mut key.rng(r)).map(|(cut, side)| (cut, r, side)))
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let (cut, _, side) = best.ok_or_else(|| invalid("no feasible bipartition found"))?;
    Ok(result(g, theta, &side, cut, false))
}

/// `Separator(G, θ)`: the least `|∂_E A|` over `A` with degree share in
/// `[θ, 1-θ]`. `budget` is the number of annealing moves per restart
/// (heuristic mode only).
pub fn separator(g: &Graph, theta: f64, mode: SeparatorMode, budget: Option<u64>, seed: u64) -> Result<SeparatorResult> {
    match mode {
        SeparatorMode::Exact => exact_separator(g, theta),
        SeparatorMode::Heuristic => heuristic_separator(g, theta, budget, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{cartesian_product, complete, cycle, hypercube, torus};

    /// Plain enumeration over all subsets.
    fn brute_force(g: &Graph, theta: f64) -> usize {
        let n = g.n_vertices();
        let total = 2.0 * g.n_edges() as f64;
        (1u64..1 << n)
            .filter_map(|mask| {
                let a: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                let share = a.iter().map(|&v| g.degree(v)).sum::<usize>() as f64 / total;
                (share >= theta - 1e-12 && share <= 1.0 - theta + 1e-12).then(|| boundary_size(g, &a))
            })
            .min()
            .unwrap()
    }

    #[test]
    fn complete_six() {
        let g = complete(6).unwrap();
        let r = separator(&g, 1.0 / 3.0, SeparatorMode::Exact, None, 0).unwrap();
        assert_eq!(r.cut_size, 8);
        assert!(r.side_a.len() == 2 || r.side_a.len() == 4);
        assert!(r.exact);
        assert_eq!(brute_force(&g, 1.0 / 3.0), 8);
    }

    #[test]
    fn torus_four_by_four() {
        let g = torus(&[4, 4]).unwrap();
        let r = separator(&g, 1.0 / 3.0, SeparatorMode::Exact, None, 0).unwrap();
        assert_eq!(r.cut_size, brute_force(&g, 1.0 / 3.0));
        assert_eq!(r.cut_size, 8);
        let share = r.degree_weighted_share;
        assert!(share >= 1.0 / 3.0 - 1e-12 && share <= 2.0 / 3.0 + 1e-12);
    }

    #[test]
    fn heuristic_never_beats_exact() {
        for g in [cycle(12).unwrap(), hypercube(4).unwrap(), torus(&[3, 5]).unwrap(), complete(8).unwrap()] {
            for theta in [0.25, 1.0 / 3.0, 0.5] {
                let Ok(e) = separator(&g, theta, SeparatorMode::Exact, None, 0) else { continue };
                let h = separator(&g, theta, SeparatorMode::Heuristic, Some(2000), 1).unwrap();
                assert!(h.cut_size >= e.cut_size);
                assert!(!h.exact);
            }
        }
    }

    #[test]
    fn heuristic_finds_bridge_cut() {
        let g = cartesian_product(&complete(20).unwrap(), &complete(2).unwrap()).unwrap();
        let r = separator(&g, 1.0 / 3.0, SeparatorMode::Heuristic, None, 3).unwrap();
        assert!(r.cut_size <= 20, "{}", r.cut_size);
    }

    #[test]
    fn limits_and_parameters() {
        let g = cycle(25).unwrap();
        assert!(matches!(separator(&g, 0.5, SeparatorMode::Exact, None, 0), Err(Error::SizeLimit { .. })));
        assert!(separator(&cycle(10).unwrap(), 0.0, SeparatorMode::Heuristic, None, 0).is_err());
        assert!(separator(&cycle(10).unwrap(), 0.6, SeparatorMode::Exact, None, 0).is_err());
    }
}
