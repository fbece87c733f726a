//! The built-in verification suite: machine checks for every closed-form
//! gonality value, equivalence chain, and morphism construction shipped by
//! the family generators, plus randomized Riemann–Roch and reduction
//! properties.
//!
//! Every check carries the claim it tests; the suite fails iff any check
//! fails. Output is deterministic for a fixed seed and independent of the
//! worker count.

use std::time::Instant;

use crate::divisor::Divisor;
use crate::families::{
    build, k8_double_star_example, k8_pendant_leaf_example, max_clique_in_removed,
    witness_divisor, FamilySpec,
};
use crate::graph::{EdgeLength, MetricGraph, PointRef};
use crate::harmonic::{
    build_sharp_morphism, fiber_divisor, is_effective_morphism, liftability_certificate,
    make_finite,
};
use crate::rank::{
    gonality_search, rank, riemann_roch_residual, GonalityOptions, RankOptions,
};
use crate::reduction::{linearly_equivalent, reduce, ReduceOptions};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub claim: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
    pub runtime_ms: u128,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Largest complete-graph size exercised (families with more vertices
    /// are skipped).
    pub max_d: u32,
    pub seed: u64,
    pub jobs: usize,
    /// Number of random Riemann–Roch cases.
    pub riemann_roch_cases: usize,
    /// Number of random edge-removal gonality cases.
    pub random_removals: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_d: 8,
            seed: 1,
            jobs: 1,
            riemann_roch_cases: 60,
            random_removals: 10,
        }
    }
}

pub fn suite_passes(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.pass)
}

struct Suite {
    results: Vec<CheckResult>,
    jobs: usize,
}

impl Suite {
    fn run<F: FnOnce() -> (String, String, bool)>(&mut self, name: &str, claim: &str, f: F) {
        let start = Instant::now();
        let (expected, computed, pass) = f();
        self.results.push(CheckResult {
            name: name.to_string(),
            claim: claim.to_string(),
            expected,
            computed,
            pass,
            runtime_ms: start.elapsed().as_millis(),
        });
    }

    fn check_gonality(&mut self, name: &str, claim: &str, g: &MetricGraph, expected: u32) {
        let opts = GonalityOptions {
            jobs: self.jobs,
            ..Default::default()
        };
        self.run(name, claim, || match gonality_search(g, &opts) {
            Ok(cert) => (
                expected.to_string(),
                cert.value.to_string(),
                cert.value == expected && cert.witness.degree() == i64::from(expected),
            ),
            Err(e) => (expected.to_string(), format!("error: {e}"), false),
        });
    }
}

/// Runs the full suite and returns one record per check.
pub fn paper_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut suite = Suite {
        results: Vec::new(),
        jobs: opts.jobs.max(1),
    };

    // complete graphs
    for d in 3..=opts.max_d.min(6) {
        let g = build(&FamilySpec::complete(d)).expect("valid spec");
        suite.check_gonality(
            &format!("gonality-complete-{d}"),
            &format!("gon(K_{d}) = {}", d - 1),
            &g,
            d - 1,
        );
    }

    // clique removal
    for (d, h) in [(5u32, 2u32), (5, 3), (6, 3), (6, 4), (8, 4)] {
        if d > opts.max_d {
            continue;
        }
        let g = build(&FamilySpec::kd_minus_kh(d, h)).expect("valid spec");
        suite.check_gonality(
            &format!("gonality-k{d}-minus-k{h}"),
            &format!("gon(K_{d} \\ K_{h}) = {}", d - h),
            &g,
            d - h,
        );
    }

    // the degree-4 witness on K_8 \ K_4 has rank exactly 1
    if opts.max_d >= 8 {
        let spec = FamilySpec::kd_minus_kh(8, 4);
        let g = build(&spec).expect("valid spec");
        let w = witness_divisor(&spec).expect("witness exists");
        suite.run(
            "rank-witness-k8-minus-k4",
            "rank((v5)+(v6)+(v7)+(v8)) = 1 on K_8 \\ K_4",
            || match rank(&g, &w, &RankOptions::default()) {
                Ok(r) => ("1".into(), r.to_string(), r == 1),
                Err(e) => ("1".into(), format!("error: {e}"), false),
            },
        );
    }

    // complete bipartite graphs
    for (m, n) in [(2u32, 3u32), (3, 3), (3, 4)] {
        if m + n > opts.max_d {
            continue;
        }
        let g = build(&FamilySpec::bipartite(m, n)).expect("valid spec");
        suite.check_gonality(
            &format!("gonality-bipartite-{m}-{n}"),
            &format!("gon(K_{{{m},{n}}}) = {}", m.min(n)),
            &g,
            m.min(n),
        );
    }

    // two-clique removals: gonality d - max of the two sizes, whether the
    // cliques are disjoint or overlap
    if opts.max_d >= 6 {
        for (tag, first, second) in [
            ("disjoint", vec!["v1", "v2", "v3"], vec!["v4", "v5"]),
            ("overlapping", vec!["v1", "v2", "v3"], vec!["v3", "v4"]),
        ] {
            let spec = FamilySpec::TwoCliquesRemoved {
                d: 6,
                first: first.iter().map(|s| s.to_string()).collect(),
                second: second.iter().map(|s| s.to_string()).collect(),
                lengths: Default::default(),
            };
            let g = build(&spec).expect("valid spec");
            suite.check_gonality(
                &format!("gonality-two-cliques-{tag}"),
                &format!("gon(K_6 minus {tag} K_3 and K_2) = 3"),
                &g,
                3,
            );
        }
    }

    // random removals from K_6: gonality = 6 - (max clique among removed)
    if opts.max_d >= 6 {
        let mut rng = SplitMix64::new(opts.seed);
        for case in 0..opts.random_removals {
            let removed = random_removal_set(&mut rng, 6, 4);
            let spec = FamilySpec::kd_minus_edges(6, removed.clone());
            let g = build(&spec).expect("removals keep K_6 connected");
            let h = max_clique_in_removed(&removed);
            suite.check_gonality(
                &format!("gonality-k6-random-removal-{case}"),
                &format!("gon(K_6 minus {} edges, max clique {h}) = {}", removed.len(), 6 - h),
                &g,
                6 - h,
            );
        }
    }

    // sharp family: gonality d-3 and the middle fiber has rank >= 1
    for d in 5..=opts.max_d.min(7) {
        for k1 in 1..=(d - 2) {
            let spec = FamilySpec::sharp(d, k1);
            let g = build(&spec).expect("valid spec");
            suite.check_gonality(
                &format!("gonality-sharp-{d}-{k1}"),
                &format!("gon(sharp d={d}, k1={k1}) = {}", d - 3),
                &g,
                d - 3,
            );
            let w = witness_divisor(&spec).expect("witness exists");
            suite.run(
                &format!("rank-sharp-witness-{d}-{k1}"),
                &format!("rank(middle fiber divisor) >= 1 on sharp d={d}, k1={k1}"),
                || match rank(&g, &w, &RankOptions::default()) {
                    Ok(r) => (">= 1".into(), r.to_string(), r >= 1),
                    Err(e) => (">= 1".into(), format!("error: {e}"), false),
                },
            );
        }
    }

    // the two K_8 equivalence chains
    if opts.max_d >= 8 {
        equivalence_chain_checks(&mut suite);
    }

    // harmonic suite
    for d in 5..=opts.max_d.min(8) {
        for k1 in 1..=(d - 2) {
            harmonic_checks(&mut suite, d, k1);
        }
    }

    // randomized Riemann-Roch
    {
        let mut rng = SplitMix64::new(opts.seed.wrapping_add(17));
        let cases = opts.riemann_roch_cases;
        suite.run(
            "riemann-roch-random",
            &format!("rank(D) - rank(K - D) = deg(D) + 1 - g on {cases} random cases"),
            || {
                let mut failures = 0usize;
                for _ in 0..cases {
                    let g = random_connected_graph(&mut rng, 3, 8, true);
                    let d = random_divisor(&mut rng, &g, -8, 8);
                    match riemann_roch_residual(&g, &d, &RankOptions::default()) {
                        Ok(0) => {}
                        _ => failures += 1,
                    }
                }
                ("0 failures".into(), format!("{failures} failures"), failures == 0)
            },
        );
    }

    // reduction properties
    {
        let mut rng = SplitMix64::new(opts.seed.wrapping_add(23));
        suite.run(
            "reduce-idempotent-and-invariant",
            "reduce is idempotent, class-invariant, and refinement-stable",
            || {
                let mut failures = 0usize;
                for _ in 0..20 {
                    let g = random_connected_graph(&mut rng, 3, 6, true);
                    let d = random_divisor(&mut rng, &g, -4, 6);
                    let q = PointRef::vertex(
                        g.vertex_ids().next().expect("nonempty").to_string(),
                    );
                    let opts1 = ReduceOptions::default();
                    let r1 = match reduce(&g, &d, &q, opts1) {
                        Ok(r) => r,
                        Err(_) => {
                            failures += 1;
                            continue;
                        }
                    };
                    let again = reduce(&g, &r1, &q, opts1).unwrap();
                    if again != r1 {
                        failures += 1;
                    }
                    let perturbed = perturb_by_principal(&mut rng, &g, &d);
                    if reduce(&g, &perturbed, &q, opts1).unwrap() != r1 {
                        failures += 1;
                    }
                    let refined = reduce(&g, &d, &q, ReduceOptions::with_subdivision(2)).unwrap();
                    if refined != r1 {
                        failures += 1;
                    }
                }
                ("0 failures".into(), format!("{failures} failures"), failures == 0)
            },
        );
    }

    suite.results
}

fn equivalence_chain_checks(suite: &mut Suite) {
    let v = |id: &str| PointRef::vertex(id);
    {
        let g = k8_double_star_example();
        let d1 = Divisor::single(v("v3"), 5);
        let d2 = Divisor::ones([v("v7"), v("v6"), v("v5"), v("v4"), v("vbar")]);
        let d3 = Divisor::new([(v("v1"), 3), (v("v2"), 2)]);
        suite.run(
            "equivalence-chain-double-star",
            "5(v3) ~ (v7)+(v6)+(v5)+(v4)+(vbar) ~ 3(v1)+2(v2) on the double-star K_8",
            || {
                let opts = ReduceOptions::default();
                let a = linearly_equivalent(&g, &d1, &d2, opts).unwrap_or(false);
                let b = linearly_equivalent(&g, &d2, &d3, opts).unwrap_or(false);
                let c = linearly_equivalent(&g, &d1, &d3, opts).unwrap_or(false);
                (
                    "true, true, true".into(),
                    format!("{a}, {b}, {c}"),
                    a && b && c,
                )
            },
        );
    }
    {
        let g = k8_pendant_leaf_example();
        let d1 = Divisor::single(v("vbar"), 5);
        let d2 = Divisor::ones([v("v1"), v("v2"), v("v4"), v("v5"), v("v7")]);
        let d3 = Divisor::single(v("v"), 5);
        suite.run(
            "equivalence-chain-pendant-leaf",
            "5(vbar) ~ (v1)+(v2)+(v4)+(v5)+(v7) ~ 5(v) on the pendant-leaf K_8",
            || {
                let opts = ReduceOptions::default();
                let a = linearly_equivalent(&g, &d1, &d2, opts).unwrap_or(false);
                let b = linearly_equivalent(&g, &d1, &d3, opts).unwrap_or(false);
                let c = linearly_equivalent(&g, &d2, &d3, opts).unwrap_or(false);
                (
                    "true, true, true".into(),
                    format!("{a}, {b}, {c}"),
                    a && b && c,
                )
            },
        );
    }
}

fn harmonic_checks(suite: &mut Suite, d: u32, k1: u32) {
    let k2 = d - 1 - k1;
    suite.run(
        &format!("harmonic-sharp-{d}-{k1}"),
        &format!("sharp morphism d={d}, k1={k1} is harmonic of degree {} with the stated local degrees", d - 3),
        || match build_sharp_morphism(d, k1) {
            Ok(phi) => {
                let rep = phi.check_harmonic().expect("structurally valid");
                let shared = format!("v{}", k2 + 2);
                let ok = rep.harmonic
                    && rep.global_degree == Some(u64::from(d - 3))
                    && rep.local_degrees[&shared] == u64::from(d - 3)
                    && rep.local_degrees["v1"] == u64::from(d - k1 - 2)
                    && rep.local_degrees["v2"] == u64::from(d - k2 - 2);
                (
                    format!("harmonic, degree {}", d - 3),
                    format!("harmonic: {}, degree {:?}", rep.harmonic, rep.global_degree),
                    ok,
                )
            }
            Err(e) => ("harmonic".into(), format!("error: {e}"), false),
        },
    );
    suite.run(
        &format!("make-finite-sharp-{d}-{k1}"),
        &format!("finite extension of sharp d={d}, k1={k1}: harmonic, effective, degree {}, liftable", d - 3),
        || {
            let phi = match build_sharp_morphism(d, k1) {
                Ok(p) => p,
                Err(e) => return ("finite harmonic".into(), format!("error: {e}"), false),
            };
            match make_finite(&phi) {
                Ok(fin) => {
                    let rep = fin.check_harmonic().expect("structurally valid");
                    let effective = is_effective_morphism(&fin).unwrap_or(false);
                    let liftable = liftability_certificate(&fin)
                        .map(|c| c.verdict)
                        .unwrap_or(false);
                    let fiber_ok = fiber_divisor(&fin, &PointRef::vertex("u2"))
                        .map(|f| f.degree() == i64::from(d - 3))
                        .unwrap_or(false);
                    let ok = fin.is_finite()
                        && rep.harmonic
                        && rep.global_degree == Some(u64::from(d - 3))
                        && effective
                        && liftable
                        && fiber_ok;
                    (
                        "finite, harmonic, effective, liftable".into(),
                        format!(
                            "finite: {}, harmonic: {}, effective: {effective}, liftable: {liftable}",
                            fin.is_finite(),
                            rep.harmonic
                        ),
                        ok,
                    )
                }
                Err(e) => ("finite harmonic".into(), format!("error: {e}"), false),
            }
        },
    );
}

/// `count` distinct random edges of `K_d` (as vertex label pairs), at
/// least one, at most `max_edges`.
pub fn random_removal_set(rng: &mut SplitMix64, d: u32, max_edges: u32) -> Vec<(String, String)> {
    let count = 1 + rng.below(u64::from(max_edges)) as u32;
    let mut chosen = std::collections::BTreeSet::new();
    while (chosen.len() as u32) < count {
        let i = 1 + rng.below(u64::from(d)) as u32;
        let j = 1 + rng.below(u64::from(d)) as u32;
        if i != j {
            chosen.insert((i.min(j), i.max(j)));
        }
    }
    chosen
        .into_iter()
        .map(|(i, j)| (format!("v{i}"), format!("v{j}")))
        .collect()
}

/// Random connected multigraph: a spanning tree plus a few extra edges.
/// Unit lengths when `unit_lengths`, else a mix of 1, 2 and 1/2.
pub fn random_connected_graph(
    rng: &mut SplitMix64,
    min_v: u64,
    max_v: u64,
    unit_lengths: bool,
) -> MetricGraph {
    let n = min_v + rng.below(max_v - min_v + 1);
    let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    let pick_len = |rng: &mut SplitMix64| {
        if unit_lengths {
            EdgeLength::Finite(crate::rational::rat(1, 1))
        } else {
            match rng.below(4) {
                0 => EdgeLength::Finite(crate::rational::rat(2, 1)),
                1 => EdgeLength::Finite(crate::rational::rat(1, 2)),
                _ => EdgeLength::Finite(crate::rational::rat(1, 1)),
            }
        }
    };
    for i in 2..=n {
        let parent = 1 + rng.below(i - 1);
        let len = pick_len(rng);
        edges.push((
            format!("e{}", edges.len() + 1),
            format!("v{parent}"),
            format!("v{i}"),
            len,
        ));
    }
    let extras = rng.below(4);
    for _ in 0..extras {
        let a = 1 + rng.below(n);
        let b = 1 + rng.below(n);
        if a == b {
            continue;
        }
        let len = pick_len(rng);
        edges.push((
            format!("e{}", edges.len() + 1),
            format!("v{a}"),
            format!("v{b}"),
            len,
        ));
    }
    MetricGraph::new(vertices, edges).expect("generated ids are unique")
}

/// Random vertex-supported divisor with degree in `deg_lo..=deg_hi`.
pub fn random_divisor(rng: &mut SplitMix64, g: &MetricGraph, deg_lo: i64, deg_hi: i64) -> Divisor {
    let vertices: Vec<String> = g.vertex_ids().map(str::to_string).collect();
    let degree = rng.range_i64(deg_lo, deg_hi);
    let mut d = Divisor::zero();
    let positives = degree.max(0) + rng.range_i64(0, 2);
    let negatives = positives - degree;
    for _ in 0..positives {
        let v = &vertices[rng.below(vertices.len() as u64) as usize];
        d.add_coeff(PointRef::vertex(v), 1);
    }
    for _ in 0..negatives {
        let v = &vertices[rng.below(vertices.len() as u64) as usize];
        d.add_coeff(PointRef::vertex(v), -1);
    }
    debug_assert_eq!(d.degree(), degree);
    d
}

/// Adds a random principal divisor (an integer vertex firing) to `d`.
pub fn perturb_by_principal(rng: &mut SplitMix64, g: &MetricGraph, d: &Divisor) -> Divisor {
    let model = crate::lattice::LatticeModel::new(g, 1).expect("finite valid graph");
    let n = model.node_count();
    let firing: Vec<i64> = (0..n).map(|_| rng.range_i64(-1, 1)).collect();
    // chips received at u: sum over edges uv of firing[v] - firing[u]
    let mut chips = model.divisor_to_vec(d).expect("vertex-supported divisor");
    for u in 0..n {
        for &v in model.neighbors(u) {
            chips[u] += firing[v] - firing[u];
        }
    }
    model.vec_to_divisor(&chips)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let opts = VerifyOptions {
            max_d: 5,
            riemann_roch_cases: 5,
            random_removals: 2,
            ..Default::default()
        };
        let results = paper_suite(&opts);
        assert!(!results.is_empty());
        for r in &results {
            assert!(r.pass, "check {} failed: {} vs {}", r.name, r.expected, r.computed);
        }
    }

    #[test]
    fn perturbation_is_equivalent() {
        let mut rng = SplitMix64::new(5);
        let g = crate::graph::complete_graph(4);
        let d = random_divisor(&mut rng, &g, -3, 5);
        let p = perturb_by_principal(&mut rng, &g, &d);
        assert_eq!(p.degree(), d.degree());
        assert!(linearly_equivalent(&g, &d, &p, ReduceOptions::default()).unwrap());
    }

    #[test]
    fn random_graphs_are_valid() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..30 {
            let g = random_connected_graph(&mut rng, 3, 8, false);
            assert!(g.is_valid(), "violations: {:?}", g.validate());
        }
    }
}
