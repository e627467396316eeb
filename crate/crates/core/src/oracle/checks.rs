use num_traits::{One, Zero};

use super::{ConfigView, EventTable, LevelCounts, Predicate};
use crate::error::{invalid, Error, Result};
use crate::graphs::Graph;
use crate::scalar::Scalar;
use crate::Exact;

/// The `p` solving `P_p(A) = δ` for an increasing, nontrivial event,
/// located by bisection to absolute tolerance `1e-12`.
///
/// An increasing event is nontrivial exactly when it misses the empty
/// configuration and contains the full one.
pub fn exact_threshold(lc: &LevelCounts, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("δ must lie in (0, 1), got {delta}")));
    }
    let m = lc.m_edges;
    if !lc.counts[0].is_zero() || !lc.counts[m].is_one() {
        return Err(Error::NoThreshold);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if lc.eval(&mid) >= delta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RussoReport {
    pub event: LevelCounts,
    /// Configurations in which flipping edge `e` flips the event.
    pub pivotal: Vec<LevelCounts>,
    /// The rational points `j/(|E|+2)`, `j = 1..=|E|+1`, at which
    /// `f'(p) = Σ_e P_p(e pivotal)` was checked.
    pub checked_points: Vec<Exact>,
    pub identity_holds: bool,
}

impl RussoReport {
    pub fn pivotal_sum<T: Scalar>(&self, p: &T) -> T {
        T::sum_all(self.pivotal.iter().map(|lc| lc.eval(p)))
    }
}

pub fn russo_decomposition(g: &Graph, pred: Predicate<'_>) -> Result<RussoReport> {
    let table = EventTable::build(g, pred)?;
    table.check_increasing()?;
    let event = table.level_counts();
    let m = table.m_edges;
    let pivotal: Vec<LevelCounts> = (0..m).map(|e| table.pivotal_counts(e)).collect();
    let checked_points: Vec<Exact> = (1..=m as u64 + 1).map(|j| Exact::from_ratio(j, m as u64 + 2)).collect();
    let mut report = RussoReport { event, pivotal, checked_points, identity_holds: true };
    report.identity_holds = report
        .checked_points
        .iter()
        .all(|p| report.event.derivative(p) == report.pivotal_sum(p));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarrisPoint {
    pub p: Exact,
    pub p_a: Exact,
    pub p_b: Exact,
    pub p_ab: Exact,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarrisReport {
    pub points: Vec<HarrisPoint>,
    pub all_hold: bool,
}

/// Checks `P_p(A ∩ B) ≥ P_p(A) P_p(B)` exactly at every `p` in `p_list`.
pub fn harris_check(g: &Graph, a: Predicate<'_>, b: Predicate<'_>, p_list: &[Exact]) -> Result<HarrisReport> {
    let ta = EventTable::build(g, a)?;
    let tb = EventTable::build(g, b)?;
    let (la, lb, lab) = (ta.level_counts(), tb.level_counts(), ta.intersection(&tb).level_counts());
    let mut points = Vec::with_capacity(p_list.len());
    for p in p_list {
        if *p < Exact::zero() || *p > Exact::one() {
            return Err(invalid("p must lie in [0, 1]"));
        }
        let (p_a, p_b, p_ab) = (la.eval(p), lb.eval(p), lab.eval(p));
        let holds = p_ab >= &p_a * &p_b;
        points.push(HarrisPoint { p: p.clone(), p_a, p_b, p_ab, holds });
    }
    let all_hold = points.iter().all(|pt| pt.holds);
    Ok(HarrisReport { points, all_hold })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionReport {
    pub p: Exact,
    pub p_a: Exact,
    pub p_a_plus: Exact,
    /// `η²/(1-p) · p|F|/(p|F|+1) · P_p(A)²`.
    pub bound: Exact,
    pub slack: Exact,
    pub holds: bool,
}

/// Insertion tolerance: with `A⁺ = {ω ∪ {e} : ω ∈ A, e ∈ F[ω]}`, checks
/// `P_p(A⁺) ≥ η²/(1-p) · p|F|/(p|F|+1) · P_p(A)²` exactly.
///
/// `f_rule` returns `F[ω]` as an edge mask; it must be a subset of `F \ ω`
/// with at least `η|F|` edges for every `ω ∈ A`.
pub fn insertion_tolerance_check(
    g: &Graph,
    event: Predicate<'_>,
    f_edges: &[usize],
    f_rule: &(dyn Fn(&ConfigView<'_>) -> u64 + Sync),
    eta: &Exact,
    p: &Exact,
) -> Result<InsertionReport> {
    if *p <= Exact::zero() || *p >= Exact::one() {
        return Err(invalid("p must lie in (0, 1)"));
    }
    if *eta <= Exact::zero() || *eta > Exact::one() {
        return Err(invalid("η must lie in (0, 1]"));
    }
    let m = g.n_edges();
    let mut f_mask = 0u64;
    for &e in f_edges {
        if e >= m {
            return Err(invalid(format!("edge {e} out of range")));
        }
        f_mask |= 1 << e;
    }
    if f_mask == 0 {
        return Err(invalid("F must be nonempty"));
    }
    let f_size = f_mask.count_ones() as u64;
    let required = eta * Exact::from_ratio(f_size, 1);

    // F[ω] for ω ∈ A via a predicate side channel: record the rule output
    // per configuration, then validate.
    let rules = std::sync::Mutex::new(Vec::<(u64, u64)>::new());
    let table = EventTable::build(g, &|c| {
        let inside = event(c);
        if inside {
            rules.lock().unwrap().push((c.mask, f_rule(c)));
        }
        inside
    })?;
    let mut rules = rules.into_inner().unwrap();
    rules.sort_unstable();
    for &(omega, rule) in &rules {
        if rule & !f_mask != 0 || rule & omega != 0 {
            return Err(Error::InvalidInstance { reason: "F[ω] is not a subset of F \\ ω".into(), witness: omega });
        }
        if Exact::from_ratio(rule.count_ones() as u64, 1) < required {
            return Err(Error::InvalidInstance { reason: "|F[ω]| < η|F|".into(), witness: omega });
        }
    }
    let mut plus = vec![0u64; (1usize << m).div_ceil(64)];
    for &(omega, rule) in &rules {
        let mut rest = rule;
        while rest != 0 {
            let e = rest.trailing_zeros();
            rest &= rest - 1;
            let w = omega | (1 << e);
            plus[(w / 64) as usize] |= 1 << (w % 64);
        }
    }
    let plus_table = EventTable::from_mask_fn(m, |w| (plus[(w / 64) as usize] >> (w % 64)) & 1 == 1)?;
    let p_a = table.level_counts().eval(p);
    let p_a_plus = plus_table.level_counts().eval(p);
    let one = Exact::one();
    let pf = p * Exact::from_ratio(f_size, 1);
    let bound = eta * eta / (&one - p) * (&pf / (&pf + &one)) * &p_a * &p_a;
    let slack = &p_a_plus - &bound;
    let holds = slack >= Exact::zero();
    Ok(InsertionReport { p: p.clone(), p_a, p_a_plus, bound, slack, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{complete, cycle, Graph};
    use crate::oracle::exact_event;
    use crate::percolation::simulate;
    use crate::stats::Proportion;

    fn single_edge() -> Graph {
        Graph::from_edges(2, vec![(0, 1)], None, true, crate::graphs::FamilyTag::new("edge", serde_json::json!({})))
            .unwrap()
    }

    #[test]
    fn single_edge_threshold_is_delta() {
        let g = single_edge();
        let lc = exact_event(&g, &|c| c.is_open(0)).unwrap();
        assert!((exact_threshold(&lc, 0.3).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn c4_threshold_inverts_nine_sixteenths() {
        let g = cycle(4).unwrap();
        let lc = exact_event(&g, &|c| c.k1 >= 3).unwrap();
        assert!((exact_threshold(&lc, 9.0 / 16.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn trivial_events_have_no_threshold() {
        let g = cycle(4).unwrap();
        let always = exact_event(&g, &|_| true).unwrap();
        let never = exact_event(&g, &|_| false).unwrap();
        assert_eq!(exact_threshold(&always, 0.5), Err(Error::NoThreshold));
        assert_eq!(exact_threshold(&never, 0.5), Err(Error::NoThreshold));
    }

    #[test]
    fn k4_spanning_threshold_matches_monte_carlo() {
        let g = complete(4).unwrap();
        let lc = exact_event(&g, &|c| c.k1 == 4).unwrap();
        let pc = exact_threshold(&lc, 0.5).unwrap();
        let pairs = simulate(&g, pc, 40_000, 17).unwrap();
        let hits = pairs.iter().filter(|c| c.k1 == 4).count() as u64;
        let est = Proportion::from_counts(hits, 40_000);
        assert!(est.lo <= 0.5 && 0.5 <= est.hi, "{est:?} at p={pc}");
    }

    #[test]
    fn russo_single_edge_and_triangle() {
        let g = single_edge();
        let r = russo_decomposition(&g, &|c| c.is_open(0)).unwrap();
        assert!(r.identity_holds);
        assert!(r.pivotal[0].is_always());

        let g = cycle(3).unwrap();
        let r = russo_decomposition(&g, &|c| c.k1 == 3).unwrap();
        assert!(r.identity_holds);
        let half = Exact::from_ratio(1, 2);
        assert_eq!(r.event.derivative(&half), r.pivotal_sum(&half));
    }

    #[test]
    fn russo_on_k4_at_quarters() {
        let g = complete(4).unwrap();
        let r = russo_decomposition(&g, &|c| c.k1 >= 3).unwrap();
        assert!(r.identity_holds);
        for j in 1..=3 {
            let p = Exact::from_ratio(j, 4);
            assert_eq!(r.event.derivative(&p), r.pivotal_sum(&p));
        }
    }

    #[test]
    fn russo_rejects_decreasing_event() {
        let g = cycle(3).unwrap();
        assert!(matches!(russo_decomposition(&g, &|c| c.k1 == 1), Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn harris_examples() {
        let g = cycle(4).unwrap();
        let ps: Vec<Exact> = (0..=4).map(|j| Exact::from_ratio(j, 4)).collect();
        let a = |c: &ConfigView<'_>| c.connected(0, 1);
        let b = |c: &ConfigView<'_>| c.connected(1, 2);
        assert!(harris_check(&g, &a, &a, &ps).unwrap().all_hold);
        assert!(harris_check(&g, &a, &b, &ps).unwrap().all_hold);
        let full = harris_check(&g, &|_| true, &b, &ps).unwrap();
        assert!(full.points.iter().all(|pt| pt.p_ab == &pt.p_a * &pt.p_b));
    }

    #[test]
    fn insertion_tolerance_examples() {
        let g = cycle(4).unwrap();
        let q = Exact::from_ratio(1, 4);
        let all: Vec<usize> = (0..4).collect();
        let empty = insertion_tolerance_check(&g, &|_| false, &all, &|_| 0, &Exact::one(), &q).unwrap();
        assert!(empty.holds && empty.p_a.is_zero() && empty.p_a_plus.is_zero());

        let closed = insertion_tolerance_check(&g, &|c| c.mask == 0, &all, &|_| 0b1111, &Exact::one(), &q).unwrap();
        assert!(closed.holds && closed.slack > Exact::zero());

        let g = complete(4).unwrap();
        let matching = [g.edge_index(0, 1).unwrap(), g.edge_index(2, 3).unwrap()];
        let mmask: u64 = matching.iter().map(|&e| 1u64 << e).sum();
        let ev = move |c: &ConfigView<'_>| c.k1 <= 2 && c.mask & mmask == 0;
        let rule = move |c: &ConfigView<'_>| mmask & !c.mask;
        for j in 1..4 {
            let rep = insertion_tolerance_check(&g, &ev, &matching, &rule, &Exact::one(), &Exact::from_ratio(j, 4)).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
    }

    #[test]
    fn insertion_tolerance_reports_witness() {
        let g = cycle(4).unwrap();
        let all: Vec<usize> = (0..4).collect();
        let res = insertion_tolerance_check(&g, &|c| c.mask == 0b1, &all, &|_| 0b1, &Exact::one(), &Exact::from_ratio(1, 2));
        assert!(matches!(res, Err(Error::InvalidInstance { witness: 1, .. })));
    }
}
