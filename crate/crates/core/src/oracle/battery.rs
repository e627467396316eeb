//! Cross-validation battery: exact oracle values against Monte Carlo.

use serde::{Deserialize, Serialize};

use super::{exact_event, russo_decomposition};
use crate::error::Result;
use crate::graphs::{complete, cycle, hypercube, path_pair, Graph};
use crate::percolation::run_replicas;
use crate::rng::{tags, StreamKey};
use crate::stats::Proportion;

pub const BATTERY_PS: [f64; 3] = [0.25, 0.5, 0.75];
/// `α` values as `(num, den)`; decided in integers as `|K1|·den ≥ num·|V|`.
pub const BATTERY_ALPHAS: [(usize, usize); 3] = [(1, 2), (3, 4), (1, 1)];
/// Interval stretch factor for the Monte Carlo agreement check.
pub const BATTERY_WILSON_FACTOR: f64 = 3.0;

pub struct BatteryInstance {
    pub name: String,
    pub graph: Graph,
}

/// cycle(3..=6), complete(3..=5), hypercube(3) and the path-pair gadget.
pub fn battery_instances() -> Vec<BatteryInstance> {
    let mut out = Vec::new();
    for n in 3..=6 {
        out.push(BatteryInstance { name: format!("cycle({n})"), graph: cycle(n).unwrap() });
    }
    for n in 3..=5 {
        out.push(BatteryInstance { name: format!("complete({n})"), graph: complete(n).unwrap() });
    }
    out.push(BatteryInstance { name: "hypercube(3)".into(), graph: hypercube(3).unwrap() });
    out.push(BatteryInstance { name: "path_pair(5)".into(), graph: path_pair(5).unwrap() });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatteryEvent {
    K1AtLeast { num: usize, den: usize },
    TwoPoint { u: usize, v: usize },
}

impl BatteryEvent {
    pub fn name(&self) -> String {
        match self {
            BatteryEvent::K1AtLeast { num, den } => format!("k1>={num}/{den}"),
            BatteryEvent::TwoPoint { u, v } => format!("{u}<->{v}"),
        }
    }
}

/// The `‖K1‖ ≥ α` events plus the two-point event from vertex 0 to the
/// smallest vertex at maximal graph distance.
pub fn battery_events(g: &Graph) -> Vec<BatteryEvent> {
    let mut out: Vec<BatteryEvent> =
        BATTERY_ALPHAS.iter().map(|&(num, den)| BatteryEvent::K1AtLeast { num, den }).collect();
    let dist = g.bfs(0);
    let far = (0..g.n_vertices()).max_by(|&a, &b| dist[a].cmp(&dist[b]).then(b.cmp(&a))).unwrap();
    out.push(BatteryEvent::TwoPoint { u: 0, v: far });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventCheck {
    pub event: String,
    pub exact: f64,
    pub estimate: Proportion,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryCell {
    pub instance: String,
    pub p: f64,
    pub checks: Vec<EventCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub replicas: u64,
    pub cells: Vec<BatteryCell>,
    pub pass_fraction: f64,
    /// Whether the Russo identity held exactly for every instance and `α`.
    pub russo_ok: bool,
}

/// Runs every (instance, p) cell with `replicas` Monte Carlo replicas.
pub fn run_battery(replicas: u64, seed: u64) -> Result<BatteryReport> {
    let base = StreamKey::new(seed).derive(tags::SAMPLE);
    let mut cells = Vec::new();
    let mut russo_ok = true;
    for (i, inst) in battery_instances().into_iter().enumerate() {
        let g = &inst.graph;
        let events = battery_events(g);
        let mut exact = Vec::new();
        for ev in &events {
            let lc = match *ev {
                BatteryEvent::K1AtLeast { num, den } => exact_event(g, &|c| c.k1_at_least(num, den))?,
                BatteryEvent::TwoPoint { u, v } => exact_event(g, &|c| c.connected(u, v))?,
            };
            exact.push(lc);
        }
        for &(num, den) in &BATTERY_ALPHAS {
            russo_ok &= russo_decomposition(g, &|c| c.k1_at_least(num, den))?.identity_holds;
        }
        for (j, &p) in BATTERY_PS.iter().enumerate() {
            let key = base.derive((i * BATTERY_PS.len() + j) as u64);
            let n = g.n_vertices();
            let flags = run_replicas(g, replicas, |s, r| {
                let (k1, _) = s.percolate(g, p, &mut key.rng(r));
                events.iter().enumerate().fold(0u32, |acc, (b, ev)| {
                    let hit = match *ev {
                        BatteryEvent::K1AtLeast { num, den } => k1 * den >= num * n,
                        BatteryEvent::TwoPoint { u, v } => s.uf.connected(u, v),
                    };
                    acc | ((hit as u32) << b)
                })
            });
            let checks: Vec<EventCheck> = events
                .iter()
                .enumerate()
                .map(|(b, ev)| {
                    let hits = flags.iter().filter(|&&f| (f >> b) & 1 == 1).count() as u64;
                    let estimate = Proportion::from_counts(hits, replicas);
                    let exact = exact[b].eval(&p);
                    EventCheck {
                        event: ev.name(),
                        exact,
                        estimate,
                        within: estimate.covers_scaled(exact, BATTERY_WILSON_FACTOR),
                    }
                })
                .collect();
            let pass = checks.iter().all(|c| c.within);
            cells.push(BatteryCell { instance: inst.name.clone(), p, checks, pass });
        }
    }
    let pass_fraction = cells.iter().filter(|c| c.pass).count() as f64 / cells.len() as f64;
    Ok(BatteryReport { replicas, cells, pass_fraction, russo_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_instances_are_small() {
        let insts = battery_instances();
        assert_eq!(insts.len(), 9);
        assert!(insts.iter().all(|i| i.graph.n_edges() <= 16));
    }

    #[test]
    fn small_battery_runs() {
        let rep = run_battery(4000, 5).unwrap();
        assert_eq!(rep.cells.len(), 27);
        assert!(rep.russo_ok);
        assert!(rep.pass_fraction >= 0.8, "{}", rep.pass_fraction);
    }
}
