//! Monte Carlo estimators checked against exact enumeration.

use perc_core::estimators::{estimate_curve, threshold, CurveMethod, ProbeMethod, ThresholdConfig};
use perc_core::graphs::{complete, cycle, hypercube, path_pair, path_pair_bridge};
use perc_core::oracle::{exact_event, exact_threshold};
use perc_core::percolation::{simulate, two_point_profile};

#[test]
fn k1_frequency_matches_polynomial_on_hypercube() {
    let g = hypercube(3).unwrap();
    let lc = exact_event(&g, &|c| c.k1_at_least(1, 2)).unwrap();
    for (i, p) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let pairs = simulate(&g, p, 40_000, 100 + i as u64).unwrap();
        let hits = pairs.iter().filter(|c| c.k1 >= 4).count() as f64 / 40_000.0;
        let exact = lc.eval(&p);
        assert!((hits - exact).abs() < 0.015, "p = {p}: {hits} vs {exact}");
    }
}

#[test]
fn two_point_profile_matches_exact_connection_probability() {
    let g = cycle(6).unwrap();
    let p = 0.6;
    let prof = two_point_profile(&g, p, 0, 50_000, 4).unwrap();
    for v in 1..6 {
        let lc = exact_event(&g, &|c| c.connected(0, v)).unwrap();
        let exact = lc.eval(&p);
        assert!(prof.estimates[v].covers_scaled(exact, 3.0), "v = {v}: {:?} vs {exact}", prof.estimates[v]);
    }
    // The antipode is hardest to reach.
    assert_eq!(prof.min_vertex, 3);
}

#[test]
fn bridge_edge_event_is_linear() {
    // The bridge is one edge, so its event polynomial is p itself.
    let g = path_pair(3).unwrap();
    let b = path_pair_bridge(&g);
    let lc = exact_event(&g, &|c| c.is_open(b)).unwrap();
    assert!((lc.eval(&0.4f64) - 0.4).abs() < 1e-12);
}

#[test]
fn curve_methods_agree_with_exact_values() {
    let g = complete(5).unwrap();
    let lc = exact_event(&g, &|c| c.k1_at_least(3, 5)).unwrap();
    let grid: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    for method in [CurveMethod::Direct, CurveMethod::SweepPool] {
        let curve = estimate_curve(&g, 0.6, &grid, 20_000, 8, method).unwrap();
        for (i, &p) in grid.iter().enumerate() {
            let exact = lc.eval(&p);
            assert!((curve.f_hat[i] - exact).abs() < 0.03, "{method:?} p = {p}: {} vs {exact}", curve.f_hat[i]);
        }
    }
}

#[test]
fn threshold_search_brackets_exact_threshold() {
    let g = cycle(5).unwrap();
    let lc = exact_event(&g, &|c| c.k1_at_least(1, 1)).unwrap();
    let exact = exact_threshold(&lc, 0.5).unwrap();
    for method in [ProbeMethod::Direct, ProbeMethod::SweepPool] {
        let cfg = ThresholdConfig { method, ..ThresholdConfig::default() };
        let est = threshold(&g, 1.0, 0.5, 5e-3, 21, &cfg).unwrap();
        assert!(est.p_lo - 5e-3 <= exact && exact <= est.p_hi + 5e-3, "{method:?}: {est:?} vs {exact}");
    }
}
