//! Property tests for the structural invariants.

mod common;

use proptest::prelude::*;

use gonlab_core::divisor::canonical_divisor;
use gonlab_core::function::{FiringSet, RationalFunction};
use gonlab_core::graph::PointRef;
use gonlab_core::json::{
    divisor_from_json, divisor_to_json, graph_from_json, graph_to_json, morphism_from_json,
    morphism_to_json,
};
use gonlab_core::rank::{rank, RankOptions};
use gonlab_core::rational::{rat, Rat};
use gonlab_core::reduction::{linearly_equivalent, reduce, ReduceOptions};
use gonlab_core::rng::SplitMix64;
use gonlab_core::verify::{perturb_by_principal, random_connected_graph, random_divisor};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn subdivision_preserves_genus_and_validity(seed in any::<u64>(), parts in 1u32..5) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 7, false);
        let sub = g.subdivide(parts).unwrap();
        prop_assert!(sub.graph.is_valid());
        prop_assert_eq!(sub.graph.genus().unwrap(), g.genus().unwrap());
    }

    #[test]
    fn tangent_directions_count_valence(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 7, true);
        for v in g.vertex_ids() {
            let p = PointRef::vertex(v);
            prop_assert_eq!(g.tangent_directions(&p).unwrap().len(), g.valence(&p).unwrap());
        }
    }

    #[test]
    fn canonical_degree_is_two_genus_minus_two(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 8, false);
        let k = canonical_divisor(&g).unwrap();
        prop_assert_eq!(k.degree(), 2 * g.genus().unwrap() as i64 - 2);
    }

    #[test]
    fn firing_functions_have_degree_zero_divisors(seed in any::<u64>(), num in 1i64..6, den in 1i64..4) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let source = format!("v{}", 1 + rng.below(g.vertex_count() as u64));
        let t = Rat::new(num, den);
        let f = RationalFunction::from_set_firing(
            &g,
            &FiringSet::of_points([PointRef::vertex(source)]),
            t,
        ).unwrap();
        prop_assert_eq!(f.divisor(&g).unwrap().degree(), 0);
    }

    #[test]
    fn equivalence_is_an_equivalence_relation(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let d1 = random_divisor(&mut rng, &g, -3, 4);
        let d2 = perturb_by_principal(&mut rng, &g, &d1);
        let d3 = perturb_by_principal(&mut rng, &g, &d2);
        let opts = ReduceOptions::default();
        prop_assert!(linearly_equivalent(&g, &d1, &d1, opts).unwrap());
        prop_assert!(linearly_equivalent(&g, &d1, &d2, opts).unwrap());
        prop_assert!(linearly_equivalent(&g, &d2, &d1, opts).unwrap());
        prop_assert!(linearly_equivalent(&g, &d2, &d3, opts).unwrap());
        prop_assert!(linearly_equivalent(&g, &d1, &d3, opts).unwrap());
    }

    #[test]
    fn equivalent_divisors_share_degree(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let d1 = random_divisor(&mut rng, &g, -3, 4);
        let d2 = random_divisor(&mut rng, &g, -3, 4);
        if d1.degree() != d2.degree() {
            prop_assert!(!linearly_equivalent(&g, &d1, &d2, ReduceOptions::default()).unwrap());
        }
    }

    #[test]
    fn graph_json_round_trip(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 8, false);
        prop_assert_eq!(graph_from_json(&graph_to_json(&g)).unwrap(), g);
    }

    #[test]
    fn divisor_json_round_trip(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 8, true);
        let mut d = random_divisor(&mut rng, &g, -6, 6);
        // throw in an interior point
        let edge = g.edge_ids().next().unwrap().to_string();
        d.add_coeff(PointRef::interior(edge, rat(1, 3)), 2);
        prop_assert_eq!(divisor_from_json(&divisor_to_json(&d)).unwrap(), d);
    }

    #[test]
    fn reduce_result_is_reduced_and_equivalent(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let d = random_divisor(&mut rng, &g, -4, 5);
        let q = PointRef::vertex("v1");
        let r = reduce(&g, &d, &q, ReduceOptions::default()).unwrap();
        prop_assert!(r.is_effective_away_from(&q));
        prop_assert!(linearly_equivalent(&g, &d, &r, ReduceOptions::default()).unwrap());
        prop_assert_eq!(r.degree(), d.degree());
    }
}

proptest! {
    // heavier checks, fewer cases
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn rank_stable_under_support_refinement(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 5, true);
        let d = random_divisor(&mut rng, &g, -2, 4);
        let r1 = rank(&g, &d, &RankOptions::with_subdivision(1)).unwrap();
        let r2 = rank(&g, &d, &RankOptions::with_subdivision(2)).unwrap();
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn rank_at_least_degree_minus_genus(seed in any::<u64>()) {
        let mut rng = SplitMix64::new(seed);
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let d = random_divisor(&mut rng, &g, 0, 6);
        let r = rank(&g, &d, &RankOptions::default()).unwrap();
        prop_assert!(r >= d.degree() - g.genus().unwrap() as i64);
        prop_assert!(r <= d.degree());
    }
}

#[test]
fn morphism_round_trip_sharp() {
    for (d, k1) in [(5u32, 1u32), (6, 2), (8, 3)] {
        let phi = gonlab_core::harmonic::build_sharp_morphism(d, k1).unwrap();
        let back = morphism_from_json(&morphism_to_json(&phi)).unwrap();
        assert_eq!(phi, back);
    }
}
