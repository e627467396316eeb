use perc_core::coupling::sample_coupled;
use perc_core::graphs::{abelian_cayley, cartesian_product, complete, cycle, hypercube, molecular_chain, torus, Graph};
use perc_core::percolation::{clusters, sample};
use perc_core::structure::{dense_check, separator, SeparatorMode};
use proptest::prelude::*;

fn constructors() -> Vec<Graph> {
    vec![
        cycle(7).unwrap(),
        torus(&[3, 4, 5]).unwrap(),
        hypercube(4).unwrap(),
        complete(9).unwrap(),
        cartesian_product(&cycle(4).unwrap(), &complete(3).unwrap()).unwrap(),
        abelian_cayley(&[6, 4], &[vec![1, 0], vec![0, 1], vec![1, 1]]).unwrap(),
        molecular_chain(16, 0.3).unwrap(),
    ]
}

#[test]
fn json_round_trip_preserves_every_constructor() {
    for g in constructors() {
        g.check_invariants().unwrap();
        let back = Graph::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.to_json_string(), g.to_json_string());
    }
}

#[test]
fn vertex_transitive_families_are_regular() {
    for g in constructors().into_iter().filter(|g| g.is_transitive()) {
        assert_eq!(g.min_degree(), g.max_degree(), "{:?}", g.family());
    }
}

#[test]
fn dense_flag_separates_complete_from_cycle() {
    assert!(dense_check(&complete(30).unwrap()).dense);
    assert!(!dense_check(&cycle(30).unwrap()).dense);
}

#[test]
fn heuristic_separator_never_beats_exact() {
    for g in [torus(&[4, 4]).unwrap(), hypercube(4).unwrap(), complete(8).unwrap()] {
        let ex = separator(&g, 1.0 / 3.0, SeparatorMode::Exact, None, 0).unwrap();
        let he = separator(&g, 1.0 / 3.0, SeparatorMode::Heuristic, None, 5).unwrap();
        assert!(he.cut_size >= ex.cut_size);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coupled_configurations_are_nested(seed in 0u64..1_000, q in 0.0f64..1.0, dp in 0.0f64..1.0) {
        let g = torus(&[6, 6]).unwrap();
        let p = q + (1.0 - q) * dp;
        let pair = sample_coupled(&g, q, p, seed, 0).unwrap();
        prop_assert!(pair.omega_q.is_subset_of(&pair.omega_p));
        let cq = clusters(&g, &pair.omega_q).unwrap();
        let cp = clusters(&g, &pair.omega_p).unwrap();
        prop_assert!(cq.k1 <= cp.k1);
    }

    #[test]
    fn samples_are_reproducible(seed in 0u64..10_000, stream in 0u64..64) {
        let g = hypercube(5).unwrap();
        prop_assert_eq!(sample(&g, 0.4, seed, stream).unwrap(), sample(&g, 0.4, seed, stream).unwrap());
    }

    #[test]
    fn torus_sizes(a in 3usize..7, b in 3usize..7) {
        let g = torus(&[a, b]).unwrap();
        prop_assert_eq!(g.n_vertices(), a * b);
        prop_assert_eq!(g.n_edges(), 2 * a * b);
    }
}
