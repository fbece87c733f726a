//! Harmonic morphisms of metric graphs: construction, verification,
//! ramification, tropical modifications, and the finite-morphism
//! construction for the sharp family.
//!
//! A morphism maps vertices to vertices and edges to edges-or-vertices,
//! with a nonnegative integer dilation per edge; dilation 0 means the edge
//! is contracted to a vertex. It is harmonic at a vertex when, for every
//! tangent direction at the image, the dilation sum over the source
//! directions mapping there is the same; the common value is the local
//! degree. For a harmonic morphism the fiber sums give a well-defined
//! global degree.
//!
//! Interior points need no explicit checks: an interior point of a
//! non-contracted edge is harmonic with degree equal to the edge dilation,
//! and an interior point of a contracted edge has degree 0.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::divisor::Divisor;
use crate::families::{build, FamilyError, FamilySpec};
use crate::graph::{EdgeLength, GraphError, MetricGraph, PointRef};
use crate::rational::{format_rat, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeImage {
    Edge(String),
    Vertex(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphismError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("source vertex `{0}` has no image")]
    MissingVertexImage(String),
    #[error("source edge `{0}` has no image or no dilation")]
    MissingEdgeImage(String),
    #[error("map entry for `{0}` does not match the source graph")]
    ExtraneousEntry(String),
    #[error("image `{image}` of `{item}` does not exist in the target")]
    UnknownImage { item: String, image: String },
    #[error("edge `{0}`: dilation is zero iff the edge is contracted to a vertex")]
    DilationContractionMismatch(String),
    #[error("edge `{edge}`: endpoints do not map onto the endpoints of `{image}`")]
    EndpointMismatch { edge: String, image: String },
    #[error("edge `{edge}`: target length must be dilation times source length")]
    MetricMismatch { edge: String },
    #[error("morphism is not harmonic: {0}")]
    NotHarmonic(String),
    #[error("morphism is not finite: edge `{0}` is contracted")]
    NotFinite(String),
    #[error("contracted edge `{0}` has infinite length")]
    ContractedInfiniteEdge(String),
    #[error("contracted edge `{0}` has an endpoint of local degree 0 and valence > 1; no finite extension is implemented for this shape")]
    UnsupportedContraction(String),
    #[error("cannot attach a segment at {0}: not a finite point")]
    ModificationAtInfinity(String),
    #[error("composition mismatch: first target differs from second source")]
    CompositionMismatch,
    #[error("fiber over {0}: interior points of infinite edges are not supported")]
    InfiniteFiberPoint(String),
}

/// A morphism of metric graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    pub source: MetricGraph,
    pub target: MetricGraph,
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, EdgeImage>,
    pub dilation: BTreeMap<String, u32>,
}

/// A point of non-harmonicity or surjectivity failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HarmonicDefect {
    UnequalSums {
        point: String,
        direction_a: String,
        direction_b: String,
        sum_a: u64,
        sum_b: u64,
    },
    UncoveredTarget { item: String },
    FiberMismatch {
        fiber_a: String,
        degree_a: u64,
        fiber_b: String,
        degree_b: u64,
    },
}

impl std::fmt::Display for HarmonicDefect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HarmonicDefect::UnequalSums {
                point,
                direction_a,
                direction_b,
                sum_a,
                sum_b,
            } => write!(
                f,
                "at `{point}`: direction `{direction_a}` sums to {sum_a} but `{direction_b}` sums to {sum_b}"
            ),
            HarmonicDefect::UncoveredTarget { item } => {
                write!(f, "target `{item}` is not covered")
            }
            HarmonicDefect::FiberMismatch {
                fiber_a,
                degree_a,
                fiber_b,
                degree_b,
            } => write!(
                f,
                "fiber over `{fiber_a}` has degree {degree_a}, over `{fiber_b}` degree {degree_b}"
            ),
        }
    }
}

/// Harmonicity report: local degrees at the source vertices, the global
/// degree when well-defined, and the failure witnesses otherwise.
#[derive(Debug, Clone)]
pub struct HarmonicReport {
    pub harmonic: bool,
    pub local_degrees: BTreeMap<String, u64>,
    pub global_degree: Option<u64>,
    pub defects: Vec<HarmonicDefect>,
}

impl GraphMorphism {
    pub fn identity(g: &MetricGraph) -> GraphMorphism {
        GraphMorphism {
            source: g.clone(),
            target: g.clone(),
            vertex_map: g.vertex_ids().map(|v| (v.to_string(), v.to_string())).collect(),
            edge_map: g
                .edge_ids()
                .map(|e| (e.to_string(), EdgeImage::Edge(e.to_string())))
                .collect(),
            dilation: g.edge_ids().map(|e| (e.to_string(), 1)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dilation.values().all(|d| *d > 0)
    }

    pub fn global_degree(&self) -> Result<u64, MorphismError> {
        let report = self.check_harmonic()?;
        if !report.harmonic {
            return Err(MorphismError::NotHarmonic(describe_defects(&report.defects)));
        }
        Ok(report.global_degree.unwrap_or(0))
    }

    /// Checks the structural invariants: totality of the maps, dilation
    /// zero exactly on contracted edges, endpoint consistency, and metric
    /// compatibility (`len(image) = dilation * len(edge)`).
    pub fn validate_structure(&self) -> Result<(), MorphismError> {
        self.source.ensure_valid()?;
        self.target.ensure_valid()?;
        for v in self.source.vertex_ids() {
            let img = self
                .vertex_map
                .get(v)
                .ok_or_else(|| MorphismError::MissingVertexImage(v.to_string()))?;
            if !self.target.has_vertex(img) {
                return Err(MorphismError::UnknownImage {
                    item: v.to_string(),
                    image: img.clone(),
                });
            }
        }
        for v in self.vertex_map.keys() {
            if !self.source.has_vertex(v) {
                return Err(MorphismError::ExtraneousEntry(v.clone()));
            }
        }
        for e in self.edge_map.keys().chain(self.dilation.keys()) {
            if !self.source.has_edge(e) {
                return Err(MorphismError::ExtraneousEntry(e.clone()));
            }
        }
        for e in self.source.edge_ids() {
            let image = self
                .edge_map
                .get(e)
                .ok_or_else(|| MorphismError::MissingEdgeImage(e.to_string()))?;
            let dil = *self
                .dilation
                .get(e)
                .ok_or_else(|| MorphismError::MissingEdgeImage(e.to_string()))?;
            let (a, b) = self.source.edge_ends(e)?;
            let fa = &self.vertex_map[a];
            let fb = &self.vertex_map[b];
            match image {
                EdgeImage::Vertex(u) => {
                    if dil != 0 {
                        return Err(MorphismError::DilationContractionMismatch(e.to_string()));
                    }
                    if !self.target.has_vertex(u) {
                        return Err(MorphismError::UnknownImage {
                            item: e.to_string(),
                            image: u.clone(),
                        });
                    }
                    if fa != u || fb != u {
                        return Err(MorphismError::EndpointMismatch {
                            edge: e.to_string(),
                            image: u.clone(),
                        });
                    }
                }
                EdgeImage::Edge(f) => {
                    if dil == 0 {
                        return Err(MorphismError::DilationContractionMismatch(e.to_string()));
                    }
                    if !self.target.has_edge(f) {
                        return Err(MorphismError::UnknownImage {
                            item: e.to_string(),
                            image: f.clone(),
                        });
                    }
                    let (x, y) = self.target.edge_ends(f)?;
                    let straight = fa == x && fb == y;
                    let reversed = fa == y && fb == x;
                    if !straight && !reversed {
                        return Err(MorphismError::EndpointMismatch {
                            edge: e.to_string(),
                            image: f.to_string(),
                        });
                    }
                    match (self.source.edge_length(e)?, self.target.edge_length(f)?) {
                        (EdgeLength::Finite(le), EdgeLength::Finite(lf)) => {
                            if lf != le * Rat::from_integer(i64::from(dil)) {
                                return Err(MorphismError::MetricMismatch {
                                    edge: e.to_string(),
                                });
                            }
                        }
                        (EdgeLength::Infinite, EdgeLength::Infinite) => {}
                        _ => {
                            return Err(MorphismError::MetricMismatch {
                                edge: e.to_string(),
                            })
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks harmonicity at every source vertex against every tangent
    /// direction at its image, surjectivity, and that all fiber sums agree
    /// (over every target vertex, and over every target edge via the
    /// dilation sums of its preimages, which covers interior points).
    pub fn check_harmonic(&self) -> Result<HarmonicReport, MorphismError> {
        self.validate_structure()?;
        let mut defects = Vec::new();
        let mut local_degrees: BTreeMap<String, u64> = BTreeMap::new();

        // sums per source vertex, per tangent direction at the image; a
        // direction at a vertex is just an incident target edge (loops are
        // forbidden)
        for p in self.source.vertex_ids() {
            let u = &self.vertex_map[p];
            let u_idx = self.target.vertex_idx(u)?;
            let mut sums: HashMap<usize, u64> = HashMap::new();
            let p_idx = self.source.vertex_idx(p)?;
            for inc in self.source.incidences(p_idx) {
                let e = self.source.edge_data(inc.edge);
                let dil = self.dilation[&e.id];
                if dil == 0 {
                    continue;
                }
                if let EdgeImage::Edge(f) = &self.edge_map[&e.id] {
                    *sums.entry(self.target.edge_idx(f)?).or_insert(0) += u64::from(dil);
                }
            }
            let target_dirs = self.target.incidences(u_idx);
            if target_dirs.is_empty() {
                local_degrees.insert(p.to_string(), 0);
                continue;
            }
            let values: Vec<(usize, u64)> = target_dirs
                .iter()
                .map(|inc| (inc.edge, sums.get(&inc.edge).copied().unwrap_or(0)))
                .collect();
            let first = values[0];
            if let Some(bad) = values.iter().find(|(_, s)| *s != first.1) {
                defects.push(HarmonicDefect::UnequalSums {
                    point: p.to_string(),
                    direction_a: self.target.edge_data(first.0).id.clone(),
                    direction_b: self.target.edge_data(bad.0).id.clone(),
                    sum_a: first.1,
                    sum_b: bad.1,
                });
            }
            local_degrees.insert(p.to_string(), first.1);
        }

        // surjectivity: every target edge must be covered (its endpoints
        // follow); a bare vertex must be hit by the vertex map
        let mut covered_edges: HashSet<String> = HashSet::new();
        for img in self.edge_map.values() {
            if let EdgeImage::Edge(f) = img {
                covered_edges.insert(f.clone());
            }
        }
        for f in self.target.edge_ids() {
            if !covered_edges.contains(f) {
                defects.push(HarmonicDefect::UncoveredTarget {
                    item: format!("edge {f}"),
                });
            }
        }
        if self.target.edge_count() == 0 {
            let hit: HashSet<&String> = self.vertex_map.values().collect();
            for u in self.target.vertex_ids() {
                if !hit.contains(&u.to_string()) {
                    defects.push(HarmonicDefect::UncoveredTarget {
                        item: format!("vertex {u}"),
                    });
                }
            }
        }

        // fiber degrees over target vertices and over target edges
        let mut fibers: Vec<(String, u64)> = Vec::new();
        let mut vertex_fiber: BTreeMap<&str, u64> = BTreeMap::new();
        for u in self.target.vertex_ids() {
            vertex_fiber.insert(u, 0);
        }
        for (p, d) in &local_degrees {
            *vertex_fiber.get_mut(self.vertex_map[p].as_str()).unwrap() += d;
        }
        for (u, d) in vertex_fiber {
            fibers.push((format!("vertex {u}"), d));
        }
        let mut edge_fiber: BTreeMap<&str, u64> = BTreeMap::new();
        for f in self.target.edge_ids() {
            edge_fiber.insert(f, 0);
        }
        for (e, img) in &self.edge_map {
            if let EdgeImage::Edge(f) = img {
                *edge_fiber.get_mut(f.as_str()).unwrap() += u64::from(self.dilation[e]);
            }
        }
        for (f, d) in edge_fiber {
            fibers.push((format!("edge {f}"), d));
        }
        let global = fibers.first().map(|(_, d)| *d);
        if let Some(g0) = global {
            if let Some(bad) = fibers.iter().find(|(_, d)| *d != g0) {
                defects.push(HarmonicDefect::FiberMismatch {
                    fiber_a: fibers[0].0.clone(),
                    degree_a: g0,
                    fiber_b: bad.0.clone(),
                    degree_b: bad.1,
                });
            }
        }

        let harmonic = defects.is_empty();
        Ok(HarmonicReport {
            harmonic,
            global_degree: if harmonic { global } else { None },
            local_degrees,
            defects,
        })
    }
}

fn describe_defects(defects: &[HarmonicDefect]) -> String {
    defects
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// The degree `d - 3` harmonic morphism from the sharp-family graph to the
/// three-vertex path tree `u1 - u2 - u3`: the shared leaf maps to `u1`,
/// the middle vertices to `u2`, and the two star roots to `u3`. Edges
/// between fibers carry dilation 1; edges inside a fiber are contracted.
pub fn build_sharp_morphism(d: u32, k1: u32) -> Result<GraphMorphism, MorphismError> {
    let spec = FamilySpec::sharp(d, k1);
    let source = build(&spec)?;
    let k2 = d - 1 - k1;
    let shared = k2 + 2;

    let one = EdgeLength::Finite(Rat::from_integer(1));
    let target = MetricGraph::new(
        vec!["u1".to_string(), "u2".to_string(), "u3".to_string()],
        vec![
            ("u1-u2".to_string(), "u1".to_string(), "u2".to_string(), one),
            ("u2-u3".to_string(), "u2".to_string(), "u3".to_string(), one),
        ],
    )?;

    let class_of = |label: &str| -> &'static str {
        let idx: u32 = label[1..].parse().expect("family labels are v<i>");
        if idx == shared {
            "u1"
        } else if idx <= 2 {
            "u3"
        } else {
            "u2"
        }
    };
    let mut vertex_map = BTreeMap::new();
    for v in source.vertex_ids() {
        vertex_map.insert(v.to_string(), class_of(v).to_string());
    }
    let mut edge_map = BTreeMap::new();
    let mut dilation = BTreeMap::new();
    for e in source.edge_ids() {
        let (a, b) = source.edge_ends(e)?;
        let (ca, cb) = (class_of(a), class_of(b));
        let (img, dil) = match (ca, cb) {
            ("u1", "u2") | ("u2", "u1") => (EdgeImage::Edge("u1-u2".to_string()), 1),
            ("u2", "u3") | ("u3", "u2") => (EdgeImage::Edge("u2-u3".to_string()), 1),
            ("u2", "u2") => (EdgeImage::Vertex("u2".to_string()), 0),
            ("u3", "u3") => (EdgeImage::Vertex("u3".to_string()), 0),
            other => unreachable!("sharp graph has no {other:?} edges"),
        };
        edge_map.insert(e.to_string(), img);
        dilation.insert(e.to_string(), dil);
    }
    let morphism = GraphMorphism {
        source,
        target,
        vertex_map,
        edge_map,
        dilation,
    };
    debug_assert!(morphism.validate_structure().is_ok());
    Ok(morphism)
}

/// Result of an elementary tropical modification: the enlarged graph plus
/// the ids of the attachment vertex, the new infinite edge, and its
/// infinite endpoint.
#[derive(Debug, Clone)]
pub struct Modification {
    pub graph: MetricGraph,
    pub attach_vertex: String,
    pub leaf_edge: String,
    pub infinite_vertex: String,
}

fn fresh_id(used: &HashSet<String>, base: &str) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut n = 2;
    loop {
        let candidate = format!("{base}~{n}");
        if !used.contains(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Attaches the segment `[0, inf]` at a finite point of `g`, subdividing
/// an edge first when the point is interior. Genus is unchanged.
pub fn elementary_modification(g: &MetricGraph, p: &PointRef) -> Result<Modification, MorphismError> {
    g.ensure_valid()?;
    g.check_point(p)?;
    let used_vertices: HashSet<String> = g.vertex_ids().map(str::to_string).collect();
    let used_edges: HashSet<String> = g.edge_ids().map(str::to_string).collect();

    let mut vertices: Vec<String> = g.vertex_ids().map(str::to_string).collect();
    let mut edges: Vec<(String, String, String, EdgeLength)> = g
        .edges_iter()
        .map(|e| {
            (
                e.id.clone(),
                g.vertex_id(e.ends.0).to_string(),
                g.vertex_id(e.ends.1).to_string(),
                e.length,
            )
        })
        .collect();

    let attach = match p {
        PointRef::Vertex(v) => {
            // infinite vertices are not finite points
            let vi = g.vertex_idx(v)?;
            let at_infinity = g.incidences(vi).iter().any(|inc| {
                let e = g.edge_data(inc.edge);
                e.length.is_infinite() && g.incidences(vi).len() == 1
            });
            if at_infinity {
                return Err(MorphismError::ModificationAtInfinity(p.to_string()));
            }
            v.clone()
        }
        PointRef::Interior { edge, offset } => {
            let pos = edges
                .iter()
                .position(|(id, ..)| id == edge)
                .ok_or_else(|| GraphError::UnknownEdge(edge.clone()))?;
            let (id, a, b, len) = edges.remove(pos);
            let len = len
                .finite()
                .ok_or_else(|| GraphError::InfiniteEdge(id.clone()))?;
            let mid = fresh_id(&used_vertices, &format!("{id}:cut"));
            vertices.push(mid.clone());
            edges.insert(
                pos,
                (
                    fresh_id(&used_edges, &format!("{id}:a")),
                    a,
                    mid.clone(),
                    EdgeLength::Finite(*offset),
                ),
            );
            edges.insert(
                pos + 1,
                (
                    fresh_id(&used_edges, &format!("{id}:b")),
                    mid.clone(),
                    b,
                    EdgeLength::Finite(len - offset),
                ),
            );
            mid
        }
    };
    let infinite_vertex = fresh_id(
        &vertices.iter().cloned().collect::<HashSet<_>>(),
        &format!("{attach}:inf"),
    );
    vertices.push(infinite_vertex.clone());
    let leaf_edge = fresh_id(&used_edges, &format!("{attach}:leaf"));
    edges.push((
        leaf_edge.clone(),
        attach.clone(),
        infinite_vertex.clone(),
        EdgeLength::Infinite,
    ));
    let graph = MetricGraph::new(vertices, edges)?;
    debug_assert!(graph.is_valid());
    Ok(Modification {
        graph,
        attach_vertex: attach,
        leaf_edge,
        infinite_vertex,
    })
}

/// Mutable working copy of a morphism used by [`make_finite`].
struct Working {
    src_vertices: Vec<String>,
    src_edges: Vec<(String, String, String, EdgeLength)>,
    tgt_vertices: Vec<String>,
    tgt_edges: Vec<(String, String, String, EdgeLength)>,
    vmap: BTreeMap<String, String>,
    emap: BTreeMap<String, EdgeImage>,
    dil: BTreeMap<String, u32>,
}

impl Working {
    fn from_morphism(m: &GraphMorphism) -> Working {
        Working {
            src_vertices: m.source.vertex_ids().map(str::to_string).collect(),
            src_edges: m
                .source
                .edges_iter()
                .map(|e| {
                    (
                        e.id.clone(),
                        m.source.vertex_id(e.ends.0).to_string(),
                        m.source.vertex_id(e.ends.1).to_string(),
                        e.length,
                    )
                })
                .collect(),
            tgt_vertices: m.target.vertex_ids().map(str::to_string).collect(),
            tgt_edges: m
                .target
                .edges_iter()
                .map(|e| {
                    (
                        e.id.clone(),
                        m.target.vertex_id(e.ends.0).to_string(),
                        m.target.vertex_id(e.ends.1).to_string(),
                        e.length,
                    )
                })
                .collect(),
            vmap: m.vertex_map.clone(),
            emap: m.edge_map.clone(),
            dil: m.dilation.clone(),
        }
    }

    fn to_morphism(&self) -> Result<GraphMorphism, MorphismError> {
        let source = MetricGraph::new(self.src_vertices.clone(), self.src_edges.iter().cloned())?;
        let target = MetricGraph::new(self.tgt_vertices.clone(), self.tgt_edges.iter().cloned())?;
        Ok(GraphMorphism {
            source,
            target,
            vertex_map: self.vmap.clone(),
            edge_map: self.emap.clone(),
            dilation: self.dil.clone(),
        })
    }

    fn fresh_src_vertex(&mut self, base: &str) -> String {
        let used: HashSet<String> = self.src_vertices.iter().cloned().collect();
        let id = fresh_id(&used, base);
        self.src_vertices.push(id.clone());
        id
    }

    fn fresh_tgt_vertex(&mut self, base: &str) -> String {
        let used: HashSet<String> = self.tgt_vertices.iter().cloned().collect();
        let id = fresh_id(&used, base);
        self.tgt_vertices.push(id.clone());
        id
    }

    fn fresh_src_edge_id(&self, base: &str) -> String {
        let used: HashSet<String> = self.src_edges.iter().map(|(id, ..)| id.clone()).collect();
        fresh_id(&used, base)
    }

    fn fresh_tgt_edge_id(&self, base: &str) -> String {
        let used: HashSet<String> = self.tgt_edges.iter().map(|(id, ..)| id.clone()).collect();
        fresh_id(&used, base)
    }

    fn add_src_edge(&mut self, id: &str, a: &str, b: &str, len: EdgeLength, img: EdgeImage, dil: u32) {
        self.src_edges
            .push((id.to_string(), a.to_string(), b.to_string(), len));
        self.emap.insert(id.to_string(), img);
        self.dil.insert(id.to_string(), dil);
    }
}

/// Extends a harmonic morphism with contracted edges to a finite harmonic
/// morphism by tropical modifications, preserving the global degree.
///
/// Per contracted edge `e` with image vertex `u`: the edge is split at its
/// midpoint `m` and two infinite segments are attached at `m`; the target
/// gains a new vertex `u'` at distance `len(e)/2` from `u` followed by an
/// infinite segment `f`; the halves map onto `u u'` and the segments at
/// `m` onto `f`, all with dilation 1. Harmonicity toward the new direction
/// is then restored at every vertex of the fiber of `u` by attaching one
/// modified segment (a finite stub of length `len(e)/2` mapping onto
/// `u u'`, continued by an infinite segment mapping onto `f`) per missing
/// unit of local degree.
///
/// A contracted edge with a valence-1 endpoint of local degree 0 (the
/// star root of the sharp family with `k1 = d - 2`) is handled by mapping
/// the edge itself onto a new target segment of the same length instead;
/// the fiber is then filled with finite stubs only.
///
/// The output morphism is finite, harmonic, effective, of the same global
/// degree, and all its dilations are 1, so its liftability certificate is
/// trivial.
pub fn make_finite(phi: &GraphMorphism) -> Result<GraphMorphism, MorphismError> {
    let report = phi.check_harmonic()?;
    if !report.harmonic {
        return Err(MorphismError::NotHarmonic(describe_defects(&report.defects)));
    }
    let contracted: Vec<String> = phi
        .dilation
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(e, _)| e.clone())
        .collect();
    if contracted.is_empty() {
        return Ok(phi.clone());
    }

    let mut w = Working::from_morphism(phi);
    for e in contracted {
        let current = w.to_morphism()?;
        let report = current.check_harmonic()?;
        debug_assert!(report.harmonic, "intermediate morphism stays harmonic");

        let pos = w
            .src_edges
            .iter()
            .position(|(id, ..)| *id == e)
            .expect("contracted edge exists");
        let (_, a, b, len) = w.src_edges[pos].clone();
        let len = len
            .finite()
            .ok_or_else(|| MorphismError::ContractedInfiniteEdge(e.clone()))?;
        let u = w.vmap[&a].clone();
        let fiber: Vec<String> = w
            .vmap
            .iter()
            .filter(|(_, img)| **img == u)
            .map(|(p, _)| p.clone())
            .collect();
        let degree_of = |p: &str| -> u64 { report.local_degrees.get(p).copied().unwrap_or(0) };
        let (da, db) = (degree_of(&a), degree_of(&b));

        if da >= 1 && db >= 1 {
            // midpoint construction
            let half = EdgeLength::Finite(len / Rat::from_integer(2));
            let m = w.fresh_src_vertex(&format!("{e}:m"));
            let w1 = w.fresh_src_vertex(&format!("{e}:w1"));
            let w2 = w.fresh_src_vertex(&format!("{e}:w2"));
            let u_new = w.fresh_tgt_vertex(&format!("{e}:u"));
            let z = w.fresh_tgt_vertex(&format!("{e}:z"));
            let t_edge = w.fresh_tgt_edge_id(&format!("{e}:t"));
            let f_edge = w.fresh_tgt_edge_id(&format!("{e}:f"));
            w.tgt_edges
                .push((t_edge.clone(), u.clone(), u_new.clone(), half));
            w.tgt_edges
                .push((f_edge.clone(), u_new.clone(), z.clone(), EdgeLength::Infinite));
            w.vmap.insert(m.clone(), u_new.clone());
            w.vmap.insert(w1.clone(), z.clone());
            w.vmap.insert(w2.clone(), z.clone());

            w.src_edges.remove(pos);
            w.emap.remove(&e);
            w.dil.remove(&e);
            let h1 = w.fresh_src_edge_id(&format!("{e}:h1"));
            w.add_src_edge(&h1, &a, &m, half, EdgeImage::Edge(t_edge.clone()), 1);
            let h2 = w.fresh_src_edge_id(&format!("{e}:h2"));
            w.add_src_edge(&h2, &m, &b, half, EdgeImage::Edge(t_edge.clone()), 1);
            let f1 = w.fresh_src_edge_id(&format!("{e}:f1"));
            w.add_src_edge(&f1, &m, &w1, EdgeLength::Infinite, EdgeImage::Edge(f_edge.clone()), 1);
            let f2 = w.fresh_src_edge_id(&format!("{e}:f2"));
            w.add_src_edge(&f2, &m, &w2, EdgeLength::Infinite, EdgeImage::Edge(f_edge.clone()), 1);

            for p in &fiber {
                let have = u64::from(*p == a) + u64::from(*p == b);
                let needed = degree_of(p).saturating_sub(have);
                for i in 0..needed {
                    let x = w.fresh_src_vertex(&format!("{e}:x{i}:{p}"));
                    let y = w.fresh_src_vertex(&format!("{e}:y{i}:{p}"));
                    let rx = w.fresh_src_edge_id(&format!("{e}:rx{i}:{p}"));
                    w.add_src_edge(&rx, p, &x, half, EdgeImage::Edge(t_edge.clone()), 1);
                    let ry = w.fresh_src_edge_id(&format!("{e}:ry{i}:{p}"));
                    w.add_src_edge(&ry, &x, &y, EdgeLength::Infinite, EdgeImage::Edge(f_edge.clone()), 1);
                    w.vmap.insert(x.clone(), u_new.clone());
                    w.vmap.insert(y.clone(), z.clone());
                }
            }
        } else {
            // an endpoint of local degree 0: legal only for a bare leaf,
            // whose contracted edge is stretched onto a new target segment
            let (zero, positive) = if da == 0 && db >= 1 {
                (a.clone(), b.clone())
            } else if db == 0 && da >= 1 {
                (b.clone(), a.clone())
            } else {
                return Err(MorphismError::UnsupportedContraction(e.clone()));
            };
            let zero_valence = w
                .src_edges
                .iter()
                .filter(|(_, x, y, _)| *x == zero || *y == zero)
                .count();
            if zero_valence != 1 {
                return Err(MorphismError::UnsupportedContraction(e.clone()));
            }
            let u_new = w.fresh_tgt_vertex(&format!("{e}:u"));
            let t_edge = w.fresh_tgt_edge_id(&format!("{e}:t"));
            w.tgt_edges.push((
                t_edge.clone(),
                u.clone(),
                u_new.clone(),
                EdgeLength::Finite(len),
            ));
            w.emap.insert(e.clone(), EdgeImage::Edge(t_edge.clone()));
            w.dil.insert(e.clone(), 1);
            w.vmap.insert(zero.clone(), u_new.clone());
            for p in &fiber {
                if *p == zero {
                    continue;
                }
                let have = u64::from(*p == positive);
                let needed = degree_of(p).saturating_sub(have);
                for i in 0..needed {
                    let x = w.fresh_src_vertex(&format!("{e}:x{i}:{p}"));
                    let rx = w.fresh_src_edge_id(&format!("{e}:rx{i}:{p}"));
                    w.add_src_edge(
                        &rx,
                        p,
                        &x,
                        EdgeLength::Finite(len),
                        EdgeImage::Edge(t_edge.clone()),
                        1,
                    );
                    w.vmap.insert(x.clone(), u_new.clone());
                }
            }
        }
    }

    let result = w.to_morphism()?;
    let final_report = result.check_harmonic()?;
    if !final_report.harmonic {
        return Err(MorphismError::NotHarmonic(describe_defects(
            &final_report.defects,
        )));
    }
    debug_assert!(result.is_finite());
    Ok(result)
}

/// The ramification divisor `R(p') = 2(d_{p'} - 1) - sum (d_{v'} - 1)`
/// over the source vertices; contracted directions contribute `-1` terms.
pub fn ramification_divisor(phi: &GraphMorphism) -> Result<Divisor, MorphismError> {
    let report = phi.check_harmonic()?;
    if !report.harmonic {
        return Err(MorphismError::NotHarmonic(describe_defects(&report.defects)));
    }
    let mut d = Divisor::zero();
    for p in phi.source.vertex_ids() {
        let dp = report.local_degrees[p] as i64;
        let p_idx = phi.source.vertex_idx(p)?;
        let mut dir_sum = 0i64;
        for inc in phi.source.incidences(p_idx) {
            let dil = i64::from(phi.dilation[&phi.source.edge_data(inc.edge).id]);
            dir_sum += dil - 1;
        }
        d.add_coeff(PointRef::vertex(p), 2 * (dp - 1) - dir_sum);
    }
    Ok(d)
}

/// Effectivity: `r_{p'} = R(p') - #(zero-dilation directions at p')` must
/// be nonnegative at every source vertex.
pub fn is_effective_morphism(phi: &GraphMorphism) -> Result<bool, MorphismError> {
    let r = ramification_divisor(phi)?;
    for p in phi.source.vertex_ids() {
        let p_idx = phi.source.vertex_idx(p)?;
        let zero_dirs = phi
            .source
            .incidences(p_idx)
            .iter()
            .filter(|inc| phi.dilation[&phi.source.edge_data(inc.edge).id] == 0)
            .count() as i64;
        if r.coeff(&PointRef::vertex(p)) - zero_dirs < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Liftability data of a finite harmonic morphism: for every source vertex
/// the partitions of the local degree given by the directional derivatives
/// grouped by image tangent direction.
///
/// The verdict is `true` only in the sufficient case where every part of
/// every partition is 1; otherwise the certificate is inconclusive
/// (`verdict = false`, reason "unknown").
#[derive(Debug, Clone)]
pub struct LiftabilityCertificate {
    /// Per source vertex: one sorted partition per tangent direction at
    /// the image vertex, keyed in target edge id order.
    pub partitions: BTreeMap<String, Vec<(String, Vec<u32>)>>,
    pub verdict: bool,
    pub reason: String,
}

pub fn liftability_certificate(
    phi: &GraphMorphism,
) -> Result<LiftabilityCertificate, MorphismError> {
    if let Some((e, _)) = phi.dilation.iter().find(|(_, d)| **d == 0) {
        return Err(MorphismError::NotFinite(e.clone()));
    }
    let report = phi.check_harmonic()?;
    if !report.harmonic {
        return Err(MorphismError::NotHarmonic(describe_defects(&report.defects)));
    }
    let mut partitions = BTreeMap::new();
    let mut trivial = true;
    for p in phi.source.vertex_ids() {
        let u = &phi.vertex_map[p];
        let u_idx = phi.target.vertex_idx(u)?;
        let mut per_dir: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for inc in phi.target.incidences(u_idx) {
            per_dir.insert(phi.target.edge_data(inc.edge).id.clone(), Vec::new());
        }
        let p_idx = phi.source.vertex_idx(p)?;
        for inc in phi.source.incidences(p_idx) {
            let e = phi.source.edge_data(inc.edge);
            if let EdgeImage::Edge(f) = &phi.edge_map[&e.id] {
                per_dir
                    .get_mut(f)
                    .expect("image edge is incident to the image vertex")
                    .push(phi.dilation[&e.id]);
            }
        }
        let mut entries: Vec<(String, Vec<u32>)> = per_dir.into_iter().collect();
        for (_, parts) in entries.iter_mut() {
            parts.sort_unstable();
            if parts.iter().any(|d| *d != 1) {
                trivial = false;
            }
        }
        partitions.insert(p.to_string(), entries);
    }
    Ok(LiftabilityCertificate {
        partitions,
        verdict: trivial,
        reason: if trivial {
            "all directional derivatives equal 1".to_string()
        } else {
            "a dilation factor exceeds 1; liftability unknown".to_string()
        },
    })
}

/// The fiber divisor of a finite harmonic morphism over a target point:
/// each preimage point weighted by its local degree. Its degree equals the
/// global degree of the morphism.
pub fn fiber_divisor(phi: &GraphMorphism, p: &PointRef) -> Result<Divisor, MorphismError> {
    if let Some((e, _)) = phi.dilation.iter().find(|(_, d)| **d == 0) {
        return Err(MorphismError::NotFinite(e.clone()));
    }
    let report = phi.check_harmonic()?;
    if !report.harmonic {
        return Err(MorphismError::NotHarmonic(describe_defects(&report.defects)));
    }
    phi.target.check_point(p)?;
    match p {
        PointRef::Vertex(u) => {
            let mut d = Divisor::zero();
            for (v, img) in &phi.vertex_map {
                if img == u {
                    d.add_coeff(PointRef::vertex(v), report.local_degrees[v] as i64);
                }
            }
            Ok(d)
        }
        PointRef::Interior { edge, offset } => {
            if phi.target.edge_length(edge)?.is_infinite() {
                return Err(MorphismError::InfiniteFiberPoint(format!(
                    "{edge}@{}",
                    format_rat(offset)
                )));
            }
            let (x, _y) = phi.target.edge_ends(edge)?;
            let x = x.to_string();
            let mut d = Divisor::zero();
            for (e, img) in &phi.edge_map {
                if !matches!(img, EdgeImage::Edge(f) if f == edge) {
                    continue;
                }
                let dil = phi.dilation[e];
                let (a, _b) = phi.source.edge_ends(e)?;
                let scaled = offset / Rat::from_integer(i64::from(dil));
                let src_len = phi
                    .source
                    .edge_length(e)?
                    .finite()
                    .expect("finite image edge has finite preimages");
                let local_offset = if phi.vertex_map[a] == x {
                    scaled
                } else {
                    src_len - scaled
                };
                d.add_coeff(PointRef::interior(e.clone(), local_offset), i64::from(dil));
            }
            Ok(d)
        }
    }
}

/// Composition `second . first` of harmonic morphisms: dilations multiply.
pub fn compose(
    first: &GraphMorphism,
    second: &GraphMorphism,
) -> Result<GraphMorphism, MorphismError> {
    if first.target != second.source {
        return Err(MorphismError::CompositionMismatch);
    }
    let mut vertex_map = BTreeMap::new();
    for (v, mid) in &first.vertex_map {
        vertex_map.insert(v.clone(), second.vertex_map[mid].clone());
    }
    let mut edge_map = BTreeMap::new();
    let mut dilation = BTreeMap::new();
    for (e, img) in &first.edge_map {
        let (img2, dil2) = match img {
            EdgeImage::Vertex(u) => (EdgeImage::Vertex(second.vertex_map[u].clone()), 0),
            EdgeImage::Edge(f) => match &second.edge_map[f] {
                EdgeImage::Vertex(w) => (EdgeImage::Vertex(w.clone()), 0),
                EdgeImage::Edge(h) => (
                    EdgeImage::Edge(h.clone()),
                    first.dilation[e] * second.dilation[f],
                ),
            },
        };
        edge_map.insert(e.clone(), img2);
        dilation.insert(e.clone(), dil2);
    }
    let composed = GraphMorphism {
        source: first.source.clone(),
        target: second.target.clone(),
        vertex_map,
        edge_map,
        dilation,
    };
    composed.validate_structure()?;
    Ok(composed)
}
