use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_probability, Scratch};
use crate::error::{invalid, Result};
use crate::graphs::Graph;
use crate::rng::{tags, StreamKey};
use crate::stats::Proportion;

/// Estimates of `P_p(u ↔ v)` for every `v`, from a common set of replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoPointProfile {
    pub p: f64,
    pub source: usize,
    pub replicas: u64,
    pub estimates: Vec<Proportion>,
    /// Vertex `v ≠ u` with the smallest estimate, and that estimate.
    pub min_vertex: usize,
    pub min_estimate: Proportion,
}

pub fn two_point_profile(g: &Graph, p: f64, u: usize, replicas: u64, seed: u64) -> Result<TwoPointProfile> {
    check_probability(p, "p")?;
    if replicas == 0 {
        return Err(invalid("need at least one replica"));
    }
    if u >= g.n_vertices() {
        return Err(invalid(format!("vertex {u} out of range")));
    }
    if g.n_vertices() < 2 {
        return Err(invalid("two-point profile needs at least two vertices"));
    }
    let n = g.n_vertices();
    let key = StreamKey::new(seed).derive(tags::TWO_POINT);
    let counts = (0..replicas)
        .into_par_iter()
        .fold(
            || (Scratch::new(g), vec![0u64; n]),
            |(mut s, mut acc), r| {
                s.draw(g, p, &mut key.rng(r));
                s.union_open(g);
                let ru = s.uf.find(u);
                for (v, c) in acc.iter_mut().enumerate() {
                    if s.uf.find(v) == ru {
                        *c += 1;
                    }
                }
                (s, acc)
            },
        )
        .map(|(_, acc)| acc)
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let estimates: Vec<Proportion> = counts.iter().map(|&c| Proportion::from_counts(c, replicas)).collect();
    let (min_vertex, min_estimate) = estimates
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != u)
        .min_by(|a, b| a.1.estimate.total_cmp(&b.1.estimate).then(a.0.cmp(&b.0)))
        .map(|(v, e)| (v, *e))
        .expect("at least two vertices");
    Ok(TwoPointProfile { p, source: u, replicas, estimates, min_vertex, min_estimate })
}
