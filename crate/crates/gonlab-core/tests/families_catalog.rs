//! Fixture catalog for the degree d-3 divisor shapes on K_8 minus seven
//! edges, machine-checking each case of the two-star removal analysis:
//!
//! * two stars with TWO shared leaves (the high-valence-vertex case): the
//!   candidate divisor shapes `2(vbar) + ...` never reach rank 1;
//! * two stars with ONE shared leaf (the double-star graph): among the
//!   shapes `(vbar) + ...` exactly the all-vertex one has rank 1;
//! * the pendant-leaf graph: `5(vbar)` has rank 1 with unit lengths, and
//!   the rank depends on the edge lengths (a stretched middle edge kills
//!   it).
//!
//! Plus the two-clique removal family and the degree-5 fiber checks for
//! the d = 8 sharp graphs.

mod common;

use std::collections::HashSet;

use gonlab_core::divisor::Divisor;
use gonlab_core::families::{
    build, k8_double_star_example, k8_pendant_leaf_example, predicted_gonality, witness_divisor,
    FamilyLengths, FamilySpec,
};
use gonlab_core::graph::{EdgeLength, MetricGraph, PointRef};
use gonlab_core::harmonic::{build_sharp_morphism, fiber_divisor, make_finite};
use gonlab_core::rank::{gonality_search, rank, GonalityOptions, RankOptions};
use gonlab_core::rational::{rat, Rat};
use gonlab_core::reduction::{is_reduced, reduce, ReduceOptions};

fn v(id: &str) -> PointRef {
    PointRef::vertex(id)
}

fn complete_minus(
    vertices: &[&str],
    removed: &[(&str, &str)],
    lengths: &[((&str, &str), Rat)],
) -> MetricGraph {
    let rm: HashSet<(String, String)> = removed
        .iter()
        .flat_map(|(a, b)| {
            [
                (a.to_string(), b.to_string()),
                (b.to_string(), a.to_string()),
            ]
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            let (a, b) = (vertices[i], vertices[j]);
            if rm.contains(&(a.to_string(), b.to_string())) {
                continue;
            }
            let len = lengths
                .iter()
                .find(|((x, y), _)| (*x == a && *y == b) || (*x == b && *y == a))
                .map(|(_, l)| *l)
                .unwrap_or_else(|| Rat::from_integer(1));
            edges.push((
                format!("{a}-{b}"),
                a.to_string(),
                b.to_string(),
                EdgeLength::Finite(len),
            ));
        }
    }
    MetricGraph::new(vertices.iter().map(|s| s.to_string()), edges).unwrap()
}

/// K_8 minus two stars sharing TWO leaves (v4, v5): v3 keeps valence 7.
fn k8_two_shared_leaves() -> MetricGraph {
    complete_minus(
        &["v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8"],
        &[
            ("v1", "v4"),
            ("v1", "v5"),
            ("v1", "v6"),
            ("v1", "v7"),
            ("v2", "v4"),
            ("v2", "v5"),
            ("v2", "v8"),
        ],
        &[],
    )
}

#[test]
fn high_valence_case_divisors_never_have_rank_one() {
    let g = k8_two_shared_leaves();
    assert!(g.is_valid());
    assert_eq!(g.vertex_valence("v3").unwrap(), 7);
    let opts = RankOptions::default();
    // vertex-supported shape 2(vbar) + three single chips
    let d = Divisor::new([(v("v3"), 2), (v("v6"), 1), (v("v7"), 1), (v("v8"), 1)]);
    assert_eq!(rank(&g, &d, &opts).unwrap(), 0);
    // same shape with a chip pushed into an edge interior
    let d = Divisor::new([
        (v("v3"), 2),
        (PointRef::interior("v2-v6", rat(1, 2)), 1),
        (v("v7"), 1),
        (v("v8"), 1),
    ]);
    assert_eq!(rank(&g, &d, &opts).unwrap(), 0);
    // consequently this removal pattern does not reach gonality d-3
    let cert = gonality_search(&g, &GonalityOptions::default()).unwrap();
    assert_eq!(cert.value, 6);
}

#[test]
fn double_star_case_has_a_unique_rank_one_shape() {
    let g = k8_double_star_example();
    let opts = RankOptions::default();
    // the all-vertex shape works
    let good = Divisor::ones([v("vbar"), v("v4"), v("v5"), v("v6"), v("v7")]);
    assert_eq!(rank(&g, &good, &opts).unwrap(), 1);
    // a degree-2 packet on one vertex's star edges does not
    let with_packet = Divisor::new([
        (v("vbar"), 1),
        (PointRef::interior("v1-v4", rat(1, 2)), 2),
        (v("v5"), 1),
        (v("v6"), 1),
    ]);
    assert_eq!(rank(&g, &with_packet, &opts).unwrap(), 0);
    // a single chip sitting inside a star edge instead of on its vertex
    // does not
    let off_vertex = Divisor::new([
        (v("vbar"), 1),
        (PointRef::interior("v1-v4", rat(1, 2)), 1),
        (v("v5"), 1),
        (v("v6"), 1),
        (v("v7"), 1),
    ]);
    assert_eq!(rank(&g, &off_vertex, &opts).unwrap(), 0);
}

#[test]
fn pendant_leaf_case_rank_depends_on_lengths() {
    // unit lengths: 5(vbar) is a g^1_5
    let g = k8_pendant_leaf_example();
    let d = Divisor::single(v("vbar"), 5);
    assert_eq!(rank(&g, &d, &RankOptions::default()).unwrap(), 1);

    // stretching one middle edge at vbar breaks the simultaneous firing
    let vertices = ["vbar", "v", "w", "v1", "v2", "v4", "v5", "v7"];
    let removed = [
        ("vbar", "w"),
        ("v", "w"),
        ("v", "v1"),
        ("v", "v2"),
        ("v", "v4"),
        ("v", "v5"),
        ("v", "v7"),
    ];
    let stretched = complete_minus(&vertices, &removed, &[(("vbar", "v1"), Rat::from_integer(2))]);
    assert_eq!(rank(&stretched, &d, &RankOptions::default()).unwrap(), 0);

    // stretching the pendant edge itself is harmless
    let leaf_stretched =
        complete_minus(&vertices, &removed, &[(("vbar", "v"), Rat::from_integer(2))]);
    assert_eq!(rank(&leaf_stretched, &d, &RankOptions::default()).unwrap(), 1);
}

#[test]
fn pendant_leaf_reduction_examples() {
    let g = k8_pendant_leaf_example();
    let opts = ReduceOptions::default();
    // all five chips roll across the pendant edge
    let r = reduce(&g, &Divisor::single(v("vbar"), 5), &v("v"), opts).unwrap();
    assert_eq!(r, Divisor::single(v("v"), 5));
    assert!(is_reduced(&g, &r, &v("v"), opts).unwrap());
}

#[test]
fn two_clique_removal_gonality_and_witness() {
    // disjoint cliques: the complete bipartite corollary's general form
    let spec = FamilySpec::TwoCliquesRemoved {
        d: 6,
        first: vec!["v1".into(), "v2".into(), "v3".into()],
        second: vec!["v4".into(), "v5".into()],
        lengths: FamilyLengths::default(),
    };
    let g = build(&spec).unwrap();
    assert_eq!(predicted_gonality(&spec).unwrap(), 3);
    let cert = gonality_search(&g, &GonalityOptions::default()).unwrap();
    assert_eq!(cert.value, 3);
    let w = witness_divisor(&spec).unwrap();
    assert_eq!(w.degree(), 3);
    assert!(rank(&g, &w, &RankOptions::default()).unwrap() >= 1);

    // overlapping cliques: the union still has max clique 3
    let spec = FamilySpec::TwoCliquesRemoved {
        d: 6,
        first: vec!["v1".into(), "v2".into(), "v3".into()],
        second: vec!["v3".into(), "v4".into()],
        lengths: FamilyLengths::default(),
    };
    let g = build(&spec).unwrap();
    assert_eq!(predicted_gonality(&spec).unwrap(), 3);
    let cert = gonality_search(&g, &GonalityOptions::default()).unwrap();
    assert_eq!(cert.value, 3);
}

#[test]
fn witnesses_match_predictions_across_families() {
    let specs = vec![
        FamilySpec::complete(5),
        FamilySpec::complete(6),
        FamilySpec::kd_minus_kh(6, 3),
        FamilySpec::kd_minus_kh(8, 4),
        FamilySpec::bipartite(3, 4),
        FamilySpec::sharp(7, 3),
        FamilySpec::kd_minus_edges(
            6,
            vec![
                ("v1".into(), "v2".into()),
                ("v1".into(), "v3".into()),
                ("v2".into(), "v3".into()),
            ],
        ),
        FamilySpec::TwoCliquesRemoved {
            d: 7,
            first: vec!["v1".into(), "v2".into(), "v3".into()],
            second: vec!["v4".into(), "v5".into(), "v6".into()],
            lengths: FamilyLengths::default(),
        },
    ];
    for spec in specs {
        let g = build(&spec).unwrap();
        let predicted = predicted_gonality(&spec).unwrap();
        let w = witness_divisor(&spec).unwrap();
        assert_eq!(w.degree(), i64::from(predicted), "degree off for {spec:?}");
        assert!(w.is_effective());
        w.validate_on(&g).unwrap();
        assert!(
            rank(&g, &w, &RankOptions::default()).unwrap() >= 1,
            "witness of {spec:?} does not re-verify"
        );
    }
}

#[test]
fn sharp_d8_fibers_have_rank_one() {
    for k1 in 1..=6u32 {
        let spec = FamilySpec::sharp(8, k1);
        let g = build(&spec).unwrap();
        let fin = make_finite(&build_sharp_morphism(8, k1).unwrap()).unwrap();
        let fiber = fiber_divisor(&fin, &v("u2")).unwrap();
        assert_eq!(fiber.degree(), 5);
        // the fiber lives on original middle vertices; move it to the
        // unmodified graph by id and check its rank there
        let transported = Divisor::new(fiber.iter().map(|(p, c)| (p.clone(), c)));
        transported.validate_on(&g).unwrap();
        assert!(
            rank(&g, &transported, &RankOptions::default()).unwrap() >= 1,
            "sharp(8,{k1}) fiber is not a g^1_5"
        );
        // it coincides with the family's witness divisor
        assert_eq!(transported, witness_divisor(&spec).unwrap());
    }
}
