//! Acceptance suite: end-to-end checks of every shipped closed-form value
//! and construction, one test per criterion, each printing a PASS/FAIL
//! line. All comparisons are exact.

mod common;

use gonlab_core::divisor::Divisor;
use gonlab_core::families::{
    build, k8_double_star_example, k8_pendant_leaf_example, max_clique_in_removed,
    predicted_gonality, witness_divisor, FamilySpec,
};
use gonlab_core::function::{FiringSet, RationalFunction};
use gonlab_core::graph::{MetricGraph, PointRef};
use gonlab_core::harmonic::{
    build_sharp_morphism, fiber_divisor, is_effective_morphism, liftability_certificate,
    make_finite,
};
use gonlab_core::rank::{
    gonality_search, rank, riemann_roch_residual, search_degree_for_rank_one, GonalityOptions,
    RankOptions,
};
use gonlab_core::rational::rat;
use gonlab_core::reduction::{is_reduced, linearly_equivalent, reduce, ReduceOptions};
use gonlab_core::rng::SplitMix64;
use gonlab_core::verify::{
    perturb_by_principal, random_connected_graph, random_divisor, random_removal_set,
};

fn v(id: &str) -> PointRef {
    PointRef::vertex(id)
}

fn checked(criterion: &str, pass: bool) {
    common::report(criterion, pass);
    assert!(pass, "{criterion} failed");
}

fn gonality_value(g: &MetricGraph, subdivision: u32) -> (u32, Divisor) {
    let cert = gonality_search(g, &GonalityOptions::with_subdivision(subdivision))
        .expect("search succeeds at desk scale");
    (cert.value, cert.witness)
}

/// Every family case exercised by criteria 1, 2, 3 and 5, with its
/// predicted gonality.
fn family_cases() -> Vec<(String, FamilySpec)> {
    let mut cases = Vec::new();
    for d in 3..=6 {
        cases.push((format!("K_{d}"), FamilySpec::complete(d)));
    }
    for (d, h) in [(5, 2), (5, 3), (6, 3), (6, 4), (8, 4)] {
        cases.push((format!("K_{d} \\ K_{h}"), FamilySpec::kd_minus_kh(d, h)));
    }
    for (m, n) in [(2, 3), (3, 3), (3, 4)] {
        cases.push((format!("K_{{{m},{n}}}"), FamilySpec::bipartite(m, n)));
    }
    for d in 5..=7 {
        for k1 in 1..=(d - 2) {
            cases.push((format!("sharp(d={d}, k1={k1})"), FamilySpec::sharp(d, k1)));
        }
    }
    cases
}

#[test]
fn criterion_01_complete_graph_gonality() {
    let mut pass = true;
    for d in 3u32..=6 {
        let g = build(&FamilySpec::complete(d)).unwrap();
        let (value, witness) = gonality_value(&g, 1);
        let vertex_supported = witness
            .support()
            .all(|p| matches!(p, PointRef::Vertex(_)));
        if value != d - 1 || witness.degree() != i64::from(d - 1) || !vertex_supported {
            eprintln!("K_{d}: got gonality {value}");
            pass = false;
        }
    }
    checked("01 complete-graph gonality d-1", pass);
}

#[test]
fn criterion_02_clique_removal_gonality() {
    let mut pass = true;
    for (d, h) in [(5u32, 2u32), (5, 3), (6, 3), (6, 4), (8, 4)] {
        let g = build(&FamilySpec::kd_minus_kh(d, h)).unwrap();
        let (value, _) = gonality_value(&g, 1);
        if value != d - h {
            eprintln!("K_{d} \\ K_{h}: got gonality {value}, want {}", d - h);
            pass = false;
        }
    }
    // the stated degree-4 witness on K_8 \ K_4 has rank exactly 1
    let spec = FamilySpec::kd_minus_kh(8, 4);
    let g = build(&spec).unwrap();
    let w = witness_divisor(&spec).unwrap();
    let expected = Divisor::ones([v("v5"), v("v6"), v("v7"), v("v8")]);
    if w != expected {
        pass = false;
    }
    let r = rank(&g, &w, &RankOptions::default()).unwrap();
    if r != 1 {
        eprintln!("witness rank {r}, want exactly 1");
        pass = false;
    }
    checked("02 clique-removal gonality d-h", pass);
}

#[test]
fn criterion_03_bipartite_gonality() {
    let mut pass = true;
    for (m, n) in [(2u32, 3u32), (3, 3), (3, 4)] {
        let g = build(&FamilySpec::bipartite(m, n)).unwrap();
        let (value, _) = gonality_value(&g, 1);
        if value != m.min(n) {
            eprintln!("K_{{{m},{n}}}: got gonality {value}, want {}", m.min(n));
            pass = false;
        }
    }
    checked("03 bipartite gonality min(m,n)", pass);
}

#[test]
fn criterion_04_random_edge_removals() {
    let mut rng = SplitMix64::new(0x5EED_0004);
    let mut pass = true;
    for case in 0..30 {
        let removed = random_removal_set(&mut rng, 6, 4);
        let h = max_clique_in_removed(&removed);
        let spec = FamilySpec::kd_minus_edges(6, removed.clone());
        let g = build(&spec).unwrap();
        let (value, _) = gonality_value(&g, 1);
        if value != 6 - h || predicted_gonality(&spec).unwrap() != 6 - h {
            eprintln!("case {case}: removed {removed:?} (max clique {h}): got {value}");
            pass = false;
        }
    }
    checked("04 random removals gonality 6-h", pass);
}

#[test]
fn criterion_05_sharp_family() {
    let mut pass = true;
    for d in 5u32..=7 {
        for k1 in 1..=(d - 2) {
            let spec = FamilySpec::sharp(d, k1);
            let g = build(&spec).unwrap();
            let (value, _) = gonality_value(&g, 1);
            if value != d - 3 {
                eprintln!("sharp({d},{k1}): got gonality {value}, want {}", d - 3);
                pass = false;
            }
            // the fiber over u2 of the finite morphism, transported to the
            // unmodified graph by vertex id, has rank >= 1
            let fin = make_finite(&build_sharp_morphism(d, k1).unwrap()).unwrap();
            let fiber = fiber_divisor(&fin, &v("u2")).unwrap();
            let transported = Divisor::new(fiber.iter().map(|(p, c)| (p.clone(), c)));
            transported.validate_on(&g).unwrap();
            let r = rank(&g, &transported, &RankOptions::default()).unwrap();
            if r < 1 || fiber.degree() != i64::from(d - 3) {
                eprintln!("sharp({d},{k1}): fiber rank {r}");
                pass = false;
            }
        }
    }
    checked("05 sharp family gonality d-3 and fiber rank", pass);
}

#[test]
fn criterion_06_figure_equivalences() {
    let opts = ReduceOptions::default();
    let mut pass = true;
    {
        let g = k8_double_star_example();
        let d1 = Divisor::single(v("v3"), 5);
        let d2 = Divisor::ones([v("v7"), v("v6"), v("v5"), v("v4"), v("vbar")]);
        let d3 = Divisor::new([(v("v1"), 3), (v("v2"), 2)]);
        for (a, b) in [(&d1, &d2), (&d2, &d3), (&d1, &d3)] {
            if !linearly_equivalent(&g, a, b, opts).unwrap() {
                eprintln!("double-star chain broke between {a} and {b}");
                pass = false;
            }
        }
    }
    {
        let g = k8_pendant_leaf_example();
        let d1 = Divisor::single(v("vbar"), 5);
        let d2 = Divisor::ones([v("v1"), v("v2"), v("v4"), v("v5"), v("v7")]);
        let d3 = Divisor::single(v("v"), 5);
        for (a, b) in [(&d1, &d2), (&d1, &d3), (&d2, &d3)] {
            if !linearly_equivalent(&g, a, b, opts).unwrap() {
                eprintln!("pendant-leaf chain broke between {a} and {b}");
                pass = false;
            }
        }
    }
    checked("06 figure equivalence chains", pass);
}

#[test]
fn criterion_07_riemann_roch_random() {
    let mut rng = SplitMix64::new(0x5EED_0007);
    let mut pass = true;
    for case in 0..200 {
        let g = random_connected_graph(&mut rng, 3, 8, true);
        let d = random_divisor(&mut rng, &g, -8, 8);
        let residual = riemann_roch_residual(&g, &d, &RankOptions::default()).unwrap();
        if residual != 0 {
            eprintln!("case {case}: residual {residual} for {d}");
            pass = false;
        }
    }
    checked("07 riemann-roch residual zero on 200 random cases", pass);
}

#[test]
fn criterion_08_reduction_properties() {
    let mut pass = true;
    let opts = ReduceOptions::default();

    // idempotence and base-point reducedness on random inputs
    let mut rng = SplitMix64::new(0x5EED_0008);
    for _ in 0..40 {
        let g = random_connected_graph(&mut rng, 3, 7, true);
        let d = random_divisor(&mut rng, &g, -5, 6);
        let q = v("v1");
        let r = reduce(&g, &d, &q, opts).unwrap();
        if reduce(&g, &r, &q, opts).unwrap() != r || !is_reduced(&g, &r, &q, opts).unwrap() {
            pass = false;
        }
    }

    // class invariance under 100 random principal perturbations
    let mut rng = SplitMix64::new(0x5EED_0108);
    for case in 0..100 {
        let g = random_connected_graph(&mut rng, 3, 7, true);
        let d = random_divisor(&mut rng, &g, -4, 6);
        let q = v("v1");
        let base = reduce(&g, &d, &q, opts).unwrap();
        let perturbed = if case % 5 == 0 {
            // a genuine piecewise-linear firing function, with fractional
            // front positions
            let source = format!("v{}", 1 + rng.below(g.vertex_count() as u64));
            let f = RationalFunction::from_set_firing(
                &g,
                &FiringSet::of_points([v(&source)]),
                rat(1, 2),
            )
            .unwrap();
            &d + &f.divisor(&g).unwrap()
        } else {
            perturb_by_principal(&mut rng, &g, &d)
        };
        if reduce(&g, &perturbed, &q, opts).unwrap() != base {
            eprintln!("case {case}: reduce(D + div f) != reduce(D)");
            pass = false;
        }
    }

    // refinement invariance: subdivision s versus 2s
    let mut rng = SplitMix64::new(0x5EED_0208);
    for _ in 0..25 {
        let g = random_connected_graph(&mut rng, 3, 6, false);
        let d = random_divisor(&mut rng, &g, -4, 5);
        let q = v("v1");
        for s in [1u32, 2] {
            let a = reduce(&g, &d, &q, ReduceOptions::with_subdivision(s)).unwrap();
            let b = reduce(&g, &d, &q, ReduceOptions::with_subdivision(2 * s)).unwrap();
            if a != b {
                eprintln!("refinement mismatch at s={s}: {a} vs {b}");
                pass = false;
            }
        }
    }

    checked("08 reduction idempotent, class-invariant, refinement-stable", pass);
}

#[test]
fn criterion_09_harmonic_suite() {
    let mut pass = true;
    let mut cases: Vec<(u32, u32)> = Vec::new();
    for d in 5u32..=7 {
        for k1 in 1..=(d - 2) {
            cases.push((d, k1));
        }
    }
    cases.push((8, 3));
    for (d, k1) in cases {
        let k2 = d - 1 - k1;
        let phi = build_sharp_morphism(d, k1).unwrap();
        let rep = phi.check_harmonic().unwrap();
        let shared = format!("v{}", k2 + 2);
        let local_table_ok = rep.local_degrees[&shared] == u64::from(d - 3)
            && rep.local_degrees["v1"] == u64::from(d - k1 - 2)
            && rep.local_degrees["v2"] == u64::from(d - k2 - 2)
            && (3..=d)
                .filter(|j| *j != k2 + 2)
                .all(|j| rep.local_degrees[&format!("v{j}")] == 1);
        if !rep.harmonic || rep.global_degree != Some(u64::from(d - 3)) || !local_table_ok {
            eprintln!("sharp({d},{k1}): bad base morphism: {:?}", rep.defects);
            pass = false;
            continue;
        }
        let fin = make_finite(&phi).unwrap();
        let frep = fin.check_harmonic().unwrap();
        let effective = is_effective_morphism(&fin).unwrap();
        let liftable = liftability_certificate(&fin).unwrap().verdict;
        if !fin.is_finite()
            || !frep.harmonic
            || frep.global_degree != Some(u64::from(d - 3))
            || !effective
            || !liftable
        {
            eprintln!(
                "sharp({d},{k1}): finite extension broken (finite {}, harmonic {}, effective {effective}, liftable {liftable})",
                fin.is_finite(),
                frep.harmonic
            );
            pass = false;
        }
    }
    checked("09 harmonic suite: sharp morphisms and finite extensions", pass);
}

#[test]
fn criterion_10_lower_bound_exhaustion() {
    let mut pass = true;
    let mut cases = family_cases();
    // the same seeded random removal cases as criterion 4
    let mut rng = SplitMix64::new(0x5EED_0004);
    for case in 0..30 {
        let removed = random_removal_set(&mut rng, 6, 4);
        cases.push((
            format!("K_6 random removal {case}"),
            FamilySpec::kd_minus_edges(6, removed),
        ));
    }
    for (name, spec) in cases {
        let g = build(&spec).unwrap();
        let predicted = predicted_gonality(&spec).unwrap();
        if predicted <= 1 {
            continue;
        }
        for s in [1u32, 2] {
            match search_degree_for_rank_one(&g, predicted - 1, s, 1).unwrap() {
                None => {}
                Some(witness) => {
                    eprintln!(
                        "{name}: degree {} divisor {witness} has rank >= 1 at subdivision {s}",
                        predicted - 1
                    );
                    pass = false;
                }
            }
        }
    }
    checked(
        "10 exhaustion: no rank-1 divisor of degree gonality-1 at s in {1,2}",
        pass,
    );
}

// Oracle cross-checks: the reduction/rank machinery agrees with an
// independent integer-linear-algebra route on small instances.

#[test]
fn oracle_rank_k4_three_chips() {
    let g = build(&FamilySpec::complete(4)).unwrap();
    let d = Divisor::ones([v("v2"), v("v3"), v("v4")]);
    assert_eq!(common::brute_force_rank(&g, &d, 1), 1);
    assert_eq!(rank(&g, &d, &RankOptions::default()).unwrap(), 1);
}

#[test]
fn oracle_rank_k8_minus_k4_witness() {
    let spec = FamilySpec::kd_minus_kh(8, 4);
    let g = build(&spec).unwrap();
    let w = witness_divisor(&spec).unwrap();
    assert_eq!(common::brute_force_rank(&g, &w, 1), 1);
}

#[test]
fn oracle_agrees_with_reduction_equivalence() {
    let mut rng = SplitMix64::new(0xFACE);
    for _ in 0..40 {
        let g = random_connected_graph(&mut rng, 3, 5, true);
        let d1 = random_divisor(&mut rng, &g, -3, 4);
        let d2 = if rng.chance(1, 2) {
            perturb_by_principal(&mut rng, &g, &d1)
        } else {
            random_divisor(&mut rng, &g, -3, 4)
        };
        let fast = linearly_equivalent(&g, &d1, &d2, ReduceOptions::default()).unwrap();
        let slow = common::laplacian_equivalent(&g, &d1, &d2, 1);
        assert_eq!(fast, slow, "disagreement for {d1} vs {d2}");
    }
}

#[test]
fn oracle_agrees_with_rank_on_small_graphs() {
    let mut rng = SplitMix64::new(0xBEEF);
    for _ in 0..12 {
        let g = random_connected_graph(&mut rng, 3, 4, true);
        let d = random_divisor(&mut rng, &g, -2, 3);
        let fast = rank(&g, &d, &RankOptions::default()).unwrap();
        let slow = common::brute_force_rank(&g, &d, 1);
        assert_eq!(fast, slow, "rank mismatch for {d}");
    }
}

#[test]
fn reduced_form_maximizes_base_coefficient() {
    // among effective representatives, the q-reduced one carries the most
    // chips at q
    let mut rng = SplitMix64::new(0xD00D);
    for _ in 0..30 {
        let g = random_connected_graph(&mut rng, 3, 6, true);
        let d = random_divisor(&mut rng, &g, 0, 5);
        let q = v("v1");
        let reduced = reduce(&g, &d, &q, ReduceOptions::default()).unwrap();
        for _ in 0..5 {
            let e = perturb_by_principal(&mut rng, &g, &d);
            if e.is_effective_away_from(&q) {
                assert!(reduced.coeff(&q) >= e.coeff(&q));
            }
        }
    }
}
