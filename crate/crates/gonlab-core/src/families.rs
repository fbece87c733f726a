//! Generators for complete graphs with removed edge configurations, their
//! closed-form gonality values, and the explicit witness divisors.
//!
//! The families covered: the complete graph `K_d`; `K_d` minus a clique
//! `K_h`; `K_d` minus an arbitrary set of at most `d - 2` edges; `K_d`
//! minus two cliques (the complete bipartite graph as the disjoint case);
//! and the sharp family obtained by removing `d - 1` edges forming two
//! stars with a single shared leaf.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{reachable, EdgeLength, GraphError, MetricGraph, PointRef};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("family parameter out of range: {0}")]
    BadParameter(String),
    #[error("removed edges make the graph disconnected")]
    Disconnected,
    #[error("removed edge {0}-{1} is not an edge of the complete graph")]
    BadRemovedEdge(String, String),
    #[error("length override for unknown edge `{0}`")]
    UnknownLengthOverride(String),
    #[error("edges {0} and {1} must have the same length in this family")]
    LengthClassViolation(String, String),
    #[error("no constructive witness for this family configuration")]
    NoWitness,
}

/// Edge lengths for a family: uniform default with optional per-edge
/// overrides (subject to the family's constraints).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyLengths {
    pub uniform: Rat,
    pub overrides: BTreeMap<String, Rat>,
}

impl Default for FamilyLengths {
    fn default() -> Self {
        FamilyLengths {
            uniform: Rat::from_integer(1),
            overrides: BTreeMap::new(),
        }
    }
}

impl FamilyLengths {
    pub fn uniform(r: Rat) -> Self {
        FamilyLengths {
            uniform: r,
            overrides: BTreeMap::new(),
        }
    }

    fn length_of(&self, edge_id: &str) -> Rat {
        self.overrides.get(edge_id).copied().unwrap_or(self.uniform)
    }
}

/// A graph family instance over the labeled vertices `v1..vd`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    /// The complete graph on `d >= 2` vertices.
    CompleteK { d: u32, lengths: FamilyLengths },
    /// `K_d` minus all edges among the first `h` vertices, `2 <= h < d`.
    KdMinusKh {
        d: u32,
        h: u32,
        lengths: FamilyLengths,
    },
    /// `K_d` minus an explicit set of `1 <= i <= d-2` edges.
    KdMinusEdges {
        d: u32,
        removed: Vec<(String, String)>,
        lengths: FamilyLengths,
    },
    /// `K_d` minus the cliques on two given vertex subsets (sizes >= 2);
    /// the result must stay connected.
    TwoCliquesRemoved {
        d: u32,
        first: Vec<String>,
        second: Vec<String>,
        lengths: FamilyLengths,
    },
    /// The complete bipartite graph `K_{m,n}` realized as `K_{m+n}` minus
    /// two disjoint cliques, `m, n >= 2`. Parts are `v1..vm` and
    /// `v{m+1}..v{m+n}`.
    Bipartite {
        m: u32,
        n: u32,
        lengths: FamilyLengths,
    },
    /// `K_d` minus `d - 1` edges forming two stars with one shared leaf:
    /// the star at `v1` covers `v{k2+2}..vd`, the star at `v2` covers
    /// `v3..v{k2+2}` (where `k2 = d - 1 - k1`). The shared leaf `v{k2+2}`
    /// is disconnected from both `v1` and `v2`.
    ///
    /// Three edge classes must each carry a single length: the edges from
    /// the shared leaf into the middle, the edges at `v1`, and the edges
    /// at `v2`.
    Sharp {
        d: u32,
        k1: u32,
        lengths: FamilyLengths,
    },
}

impl FamilySpec {
    pub fn complete(d: u32) -> Self {
        FamilySpec::CompleteK {
            d,
            lengths: FamilyLengths::default(),
        }
    }

    pub fn kd_minus_kh(d: u32, h: u32) -> Self {
        FamilySpec::KdMinusKh {
            d,
            h,
            lengths: FamilyLengths::default(),
        }
    }

    pub fn kd_minus_edges(d: u32, removed: Vec<(String, String)>) -> Self {
        FamilySpec::KdMinusEdges {
            d,
            removed,
            lengths: FamilyLengths::default(),
        }
    }

    pub fn bipartite(m: u32, n: u32) -> Self {
        FamilySpec::Bipartite {
            m,
            n,
            lengths: FamilyLengths::default(),
        }
    }

    pub fn sharp(d: u32, k1: u32) -> Self {
        FamilySpec::Sharp {
            d,
            k1,
            lengths: FamilyLengths::default(),
        }
    }

    fn lengths(&self) -> &FamilyLengths {
        match self {
            FamilySpec::CompleteK { lengths, .. }
            | FamilySpec::KdMinusKh { lengths, .. }
            | FamilySpec::KdMinusEdges { lengths, .. }
            | FamilySpec::TwoCliquesRemoved { lengths, .. }
            | FamilySpec::Bipartite { lengths, .. }
            | FamilySpec::Sharp { lengths, .. } => lengths,
        }
    }
}

fn vertex_label(i: u32) -> String {
    format!("v{i}")
}

fn edge_id(i: u32, j: u32) -> String {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    format!("v{a}-v{b}")
}

/// Normalizes a removed-edge list over `v1..vd` into index pairs.
fn normalize_removed(
    d: u32,
    removed: &[(String, String)],
) -> Result<BTreeSet<(u32, u32)>, FamilyError> {
    let parse = |s: &String| -> Option<u32> {
        s.strip_prefix('v')
            .and_then(|t| t.parse::<u32>().ok())
            .filter(|i| *i >= 1 && *i <= d)
    };
    let mut out = BTreeSet::new();
    for (a, b) in removed {
        let (i, j) = match (parse(a), parse(b)) {
            (Some(i), Some(j)) if i != j => (i.min(j), i.max(j)),
            _ => return Err(FamilyError::BadRemovedEdge(a.clone(), b.clone())),
        };
        out.insert((i, j));
    }
    Ok(out)
}

/// The removed edge pairs of a family instance, as index pairs `(i, j)`,
/// `i < j`, over `v1..vd`.
pub fn removed_pairs(spec: &FamilySpec) -> Result<BTreeSet<(u32, u32)>, FamilyError> {
    match spec {
        FamilySpec::CompleteK { d, .. } => {
            check(*d >= 2, "complete graph needs d >= 2")?;
            Ok(BTreeSet::new())
        }
        FamilySpec::KdMinusKh { d, h, .. } => {
            check(*d >= 3, "K_d minus K_h needs d >= 3")?;
            check(*h >= 2 && h < d, "K_d minus K_h needs 2 <= h < d")?;
            let mut out = BTreeSet::new();
            for i in 1..=*h {
                for j in (i + 1)..=*h {
                    out.insert((i, j));
                }
            }
            Ok(out)
        }
        FamilySpec::KdMinusEdges { d, removed, .. } => {
            check(*d >= 3, "edge removal needs d >= 3")?;
            let pairs = normalize_removed(*d, removed)?;
            let i = pairs.len() as u32;
            check(i >= 1, "at least one edge must be removed")?;
            check(
                i <= d - 2,
                "at most d - 2 edges may be removed in this family",
            )?;
            Ok(pairs)
        }
        FamilySpec::TwoCliquesRemoved {
            d, first, second, ..
        } => {
            check(*d >= 3, "two-clique removal needs d >= 3")?;
            check(
                first.len() >= 2 && second.len() >= 2,
                "both cliques need at least 2 vertices",
            )?;
            let mut out = BTreeSet::new();
            for set in [first, second] {
                let mut pairs = Vec::new();
                for a in set {
                    for b in set {
                        if a < b {
                            pairs.push((a.clone(), b.clone()));
                        }
                    }
                }
                out.extend(normalize_removed(*d, &pairs)?);
            }
            Ok(out)
        }
        FamilySpec::Bipartite { m, n, .. } => {
            check(*m >= 2 && *n >= 2, "bipartite needs m, n >= 2")?;
            let d = m + n;
            let mut out = BTreeSet::new();
            for i in 1..=*m {
                for j in (i + 1)..=*m {
                    out.insert((i, j));
                }
            }
            for i in (m + 1)..=d {
                for j in (i + 1)..=d {
                    out.insert((i, j));
                }
            }
            Ok(out)
        }
        FamilySpec::Sharp { d, k1, .. } => {
            check(*d >= 4, "sharp family needs d >= 4")?;
            let k2 = d
                .checked_sub(1 + k1)
                .ok_or_else(|| FamilyError::BadParameter("k1 too large".into()))?;
            check(*k1 >= 1 && k2 >= 1, "sharp family needs k1, k2 >= 1")?;
            let mut out = BTreeSet::new();
            // star at v1: leaves v{k2+2}..vd
            for j in (k2 + 2)..=*d {
                out.insert((1, j));
            }
            // star at v2: leaves v3..v{k2+2}
            for j in 3..=(k2 + 2) {
                out.insert((2, j));
            }
            Ok(out)
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<(), FamilyError> {
    if cond {
        Ok(())
    } else {
        Err(FamilyError::BadParameter(msg.to_string()))
    }
}

fn family_size(spec: &FamilySpec) -> u32 {
    match spec {
        FamilySpec::CompleteK { d, .. }
        | FamilySpec::KdMinusKh { d, .. }
        | FamilySpec::KdMinusEdges { d, .. }
        | FamilySpec::TwoCliquesRemoved { d, .. }
        | FamilySpec::Sharp { d, .. } => *d,
        FamilySpec::Bipartite { m, n, .. } => m + n,
    }
}

/// Builds the labeled metric graph of a family instance.
pub fn build(spec: &FamilySpec) -> Result<MetricGraph, FamilyError> {
    let d = family_size(spec);
    let removed = removed_pairs(spec)?;
    let lengths = spec.lengths();

    let mut edges = Vec::new();
    let mut present: HashMap<String, HashSet<String>> = HashMap::new();
    for i in 1..=d {
        present.entry(vertex_label(i)).or_default();
    }
    for i in 1..=d {
        for j in (i + 1)..=d {
            if removed.contains(&(i, j)) {
                continue;
            }
            let id = edge_id(i, j);
            let len = lengths.length_of(&id);
            edges.push((id, vertex_label(i), vertex_label(j), EdgeLength::Finite(len)));
            present
                .entry(vertex_label(i))
                .or_default()
                .insert(vertex_label(j));
            present
                .entry(vertex_label(j))
                .or_default()
                .insert(vertex_label(i));
        }
    }
    for id in lengths.overrides.keys() {
        if !edges.iter().any(|(eid, ..)| eid == id) {
            return Err(FamilyError::UnknownLengthOverride(id.clone()));
        }
    }
    if reachable(&present, &vertex_label(1)).len() != d as usize {
        return Err(FamilyError::Disconnected);
    }

    if let FamilySpec::Sharp { d, k1, .. } = spec {
        enforce_sharp_length_classes(*d, *k1, lengths)?;
    }

    let graph = MetricGraph::new((1..=d).map(vertex_label), edges)?;
    debug_assert!(graph.is_valid());
    Ok(graph)
}

/// The sharp family requires a single length on each of three edge
/// classes: shared-leaf edges, the edges at `v1`, and the edges at `v2`.
fn enforce_sharp_length_classes(d: u32, k1: u32, lengths: &FamilyLengths) -> Result<(), FamilyError> {
    let k2 = d - 1 - k1;
    let shared = k2 + 2;
    let middle: Vec<u32> = (3..=d).filter(|j| *j != shared).collect();
    let class_a: Vec<String> = middle.iter().map(|j| edge_id(shared, *j)).collect();
    let class_b1: Vec<String> = (3..=(d - k1)).map(|j| edge_id(1, j)).collect();
    let class_b2: Vec<String> = ((k2 + 3)..=d).map(|j| edge_id(2, j)).collect();
    for class in [class_a, class_b1, class_b2] {
        for w in class.windows(2) {
            if lengths.length_of(&w[0]) != lengths.length_of(&w[1]) {
                return Err(FamilyError::LengthClassViolation(
                    w[0].clone(),
                    w[1].clone(),
                ));
            }
        }
    }
    Ok(())
}

/// The largest `h` such that the removed edges contain a complete graph
/// `K_h`. Exhaustive search, intended for desk-scale edge sets. Returns 0
/// for an empty edge list.
pub fn max_clique_in_removed(removed: &[(String, String)]) -> u32 {
    if removed.is_empty() {
        return 0;
    }
    let mut adj: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (a, b) in removed {
        if a == b {
            continue;
        }
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let vertices: Vec<&str> = {
        let mut vs: Vec<&str> = adj.keys().copied().collect();
        vs.sort_unstable();
        vs
    };
    fn extend<'a>(
        adj: &HashMap<&'a str, HashSet<&'a str>>,
        vertices: &[&'a str],
        start: usize,
        clique: &mut Vec<&'a str>,
        best: &mut usize,
    ) {
        *best = (*best).max(clique.len());
        for i in start..vertices.len() {
            let v = vertices[i];
            if clique.iter().all(|u| adj[v].contains(u)) {
                clique.push(v);
                extend(adj, vertices, i + 1, clique, best);
                clique.pop();
            }
        }
    }
    let mut best = 0;
    extend(&adj, &vertices, 0, &mut Vec::new(), &mut best);
    best as u32
}

/// Closed-form gonality of a family instance.
pub fn predicted_gonality(spec: &FamilySpec) -> Result<u32, FamilyError> {
    let removed = removed_pairs(spec)?;
    Ok(match spec {
        FamilySpec::CompleteK { d, .. } => d - 1,
        FamilySpec::KdMinusKh { d, h, .. } => d - h,
        FamilySpec::KdMinusEdges { d, .. } => {
            let pairs: Vec<(String, String)> = removed
                .iter()
                .map(|(i, j)| (vertex_label(*i), vertex_label(*j)))
                .collect();
            d - max_clique_in_removed(&pairs)
        }
        FamilySpec::TwoCliquesRemoved { d, first, second, .. } => {
            // the largest clique inside a union of two cliques is the
            // larger of the two
            build(spec)?;
            d - (first.len().max(second.len()) as u32)
        }
        FamilySpec::Bipartite { m, n, .. } => *m.min(n),
        FamilySpec::Sharp { d, .. } => d - 3,
    })
}

/// The explicit witness divisor of a family: its degree equals the
/// predicted gonality and its rank is at least 1 (re-checkable with
/// [`crate::rank`]).
pub fn witness_divisor(spec: &FamilySpec) -> Result<Divisor, FamilyError> {
    let d = family_size(spec);
    let removed = removed_pairs(spec)?;
    let ones = |it: Box<dyn Iterator<Item = u32>>| {
        Divisor::ones(it.map(|i| PointRef::Vertex(vertex_label(i))))
    };
    Ok(match spec {
        FamilySpec::CompleteK { d, .. } => ones(Box::new(1..*d)),
        FamilySpec::KdMinusKh { d, h, .. } => ones(Box::new((*h + 1)..=*d)),
        FamilySpec::KdMinusEdges { .. } => {
            // one chip on every vertex outside a maximum removed clique
            let pairs: Vec<(String, String)> = removed
                .iter()
                .map(|(i, j)| (vertex_label(*i), vertex_label(*j)))
                .collect();
            let clique = some_max_clique(&pairs).ok_or(FamilyError::NoWitness)?;
            let inside: BTreeSet<String> = clique.into_iter().collect();
            Divisor::ones(
                (1..=d)
                    .map(vertex_label)
                    .filter(|v| !inside.contains(v))
                    .map(PointRef::Vertex),
            )
        }
        FamilySpec::TwoCliquesRemoved { first, second, .. } => {
            let bigger: &Vec<String> = if second.len() > first.len() { second } else { first };
            let inside: BTreeSet<&String> = bigger.iter().collect();
            Divisor::ones(
                (1..=d)
                    .map(vertex_label)
                    .filter(|v| !inside.contains(v))
                    .map(PointRef::Vertex),
            )
        }
        FamilySpec::Bipartite { m, n, .. } => {
            if m <= n {
                ones(Box::new(1..=*m))
            } else {
                ones(Box::new((*m + 1)..=(*m + *n)))
            }
        }
        FamilySpec::Sharp { d, k1, .. } => {
            let k2 = d - 1 - k1;
            let shared = k2 + 2;
            ones(Box::new((3..=*d).filter(move |j| *j != shared)))
        }
    })
}

/// A maximum clique of the removed-edge graph, deterministic (first found
/// in sorted vertex order among maximum-size cliques).
fn some_max_clique(removed: &[(String, String)]) -> Option<Vec<String>> {
    if removed.is_empty() {
        return None;
    }
    let target = max_clique_in_removed(removed) as usize;
    let mut adj: HashMap<&str, HashSet<&str>> = HashMap::new();
    for (a, b) in removed {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let mut vertices: Vec<&str> = adj.keys().copied().collect();
    vertices.sort_unstable();
    fn search<'a>(
        adj: &HashMap<&'a str, HashSet<&'a str>>,
        vertices: &[&'a str],
        start: usize,
        clique: &mut Vec<&'a str>,
        target: usize,
    ) -> Option<Vec<String>> {
        if clique.len() == target {
            return Some(clique.iter().map(|s| s.to_string()).collect());
        }
        for i in start..vertices.len() {
            let v = vertices[i];
            if clique.iter().all(|u| adj[v].contains(u)) {
                clique.push(v);
                if let Some(found) = search(adj, vertices, i + 1, clique, target) {
                    return Some(found);
                }
                clique.pop();
            }
        }
        None
    }
    search(&adj, &vertices, 0, &mut Vec::new(), target)
}

/// A unit-length `K_8` minus seven edges forming two stars with a shared
/// leaf: the star at `v1` misses `{v3, v6, v7}`, the star at `v2` misses
/// `{v3, v4, v5, vbar}`. The shared leaf is `v3`; `vbar` has valence 6.
///
/// The divisors `5(v3)`, `(v4)+(v5)+(v6)+(v7)+(vbar)`, and `3(v1)+2(v2)`
/// are pairwise linearly equivalent of degree 5 and rank 1.
pub fn k8_double_star_example() -> MetricGraph {
    let vertices: Vec<String> = ["v1", "v2", "v3", "v4", "v5", "v6", "v7", "vbar"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let removed: HashSet<(String, String)> = [
        ("v1", "v3"),
        ("v1", "v6"),
        ("v1", "v7"),
        ("v2", "v3"),
        ("v2", "v4"),
        ("v2", "v5"),
        ("v2", "vbar"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    complete_minus(&vertices, &removed)
}

/// A unit-length `K_8` minus seven edges: `v` keeps only its edge to
/// `vbar` (a pendant leaf) and the edge `vbar-w` is removed. Equivalently
/// `(K_7 minus one edge)` plus one leaf.
///
/// The divisors `5(vbar)`, `(v1)+(v2)+(v4)+(v5)+(v7)`, and `5(v)` are
/// pairwise linearly equivalent of degree 5 and rank 1.
pub fn k8_pendant_leaf_example() -> MetricGraph {
    let vertices: Vec<String> = ["vbar", "v", "w", "v1", "v2", "v4", "v5", "v7"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut removed: HashSet<(String, String)> = HashSet::new();
    removed.insert(("vbar".to_string(), "w".to_string()));
    for other in ["w", "v1", "v2", "v4", "v5", "v7"] {
        removed.insert(("v".to_string(), other.to_string()));
    }
    complete_minus(&vertices, &removed)
}

fn complete_minus(vertices: &[String], removed: &HashSet<(String, String)>) -> MetricGraph {
    let is_removed = |a: &str, b: &str| {
        removed.contains(&(a.to_string(), b.to_string()))
            || removed.contains(&(b.to_string(), a.to_string()))
    };
    let mut edges = Vec::new();
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            let (a, b) = (&vertices[i], &vertices[j]);
            if is_removed(a, b) {
                continue;
            }
            edges.push((
                format!("{a}-{b}"),
                a.clone(),
                b.clone(),
                EdgeLength::Finite(Rat::from_integer(1)),
            ));
        }
    }
    MetricGraph::new(vertices.to_vec(), edges).expect("fixture ids are unique")
}
