//! Metric graphs with exact rational edge lengths.
//!
//! A [`MetricGraph`] is a finite multigraph where every edge carries a
//! strictly positive rational length or the distinguished value
//! [`EdgeLength::Infinite`]. Infinite edges are legal only as leaf edges
//! (exactly one endpoint of valence 1); they arise from tropical
//! modifications and are rejected by the reduction and rank machinery.
//!
//! Loops are forbidden; parallel edges are allowed.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::rational::{format_rat, lcm_of_denominators, Rat};

/// Length of an edge: a positive rational, or infinite (leaf edges only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeLength {
    Finite(Rat),
    Infinite,
}

impl EdgeLength {
    pub fn finite(&self) -> Option<Rat> {
        match self {
            EdgeLength::Finite(r) => Some(*r),
            EdgeLength::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, EdgeLength::Infinite)
    }
}

impl fmt::Display for EdgeLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeLength::Finite(r) => write!(f, "{}", format_rat(r)),
            EdgeLength::Infinite => write!(f, "inf"),
        }
    }
}

/// A point of a metric graph: a vertex, or an interior point of an edge
/// given by its rational offset from the edge's first endpoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PointRef {
    Vertex(String),
    Interior { edge: String, offset: Rat },
}

impl PointRef {
    pub fn vertex(id: impl Into<String>) -> Self {
        PointRef::Vertex(id.into())
    }

    pub fn interior(edge: impl Into<String>, offset: Rat) -> Self {
        PointRef::Interior {
            edge: edge.into(),
            offset,
        }
    }
}

impl fmt::Display for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointRef::Vertex(v) => write!(f, "({v})"),
            PointRef::Interior { edge, offset } => write!(f, "({edge}@{})", format_rat(offset)),
        }
    }
}

/// A tangent direction at a point: an incident edge together with the
/// orientation leading away from the base point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TangentDirection {
    pub base: PointRef,
    pub edge: String,
    /// True when the direction points toward the edge's second endpoint
    /// (increasing offset).
    pub toward_second_end: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct EdgeData {
    pub id: String,
    pub ends: (usize, usize),
    pub length: EdgeLength,
}

/// An invariant violation reported by [`MetricGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    Disconnected { vertex: String },
    NonpositiveLength { edge: String },
    LoopEdge { edge: String },
    InfiniteEdgeNotLeaf { edge: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::Disconnected { vertex } => {
                write!(f, "disconnected: vertex `{vertex}` is separated from the first vertex")
            }
            Violation::NonpositiveLength { edge } => {
                write!(f, "nonpositive length on edge `{edge}`")
            }
            Violation::LoopEdge { edge } => write!(f, "loop edge `{edge}` is forbidden"),
            Violation::InfiniteEdgeNotLeaf { edge } => write!(
                f,
                "infinite edge `{edge}` must have exactly one endpoint of valence 1"
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownEndpoint { edge: String, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("graph contains an infinite edge (`{0}`), not supported by this operation")]
    InfiniteEdge(String),
    #[error("subdivision factor must be positive")]
    ZeroParts,
    #[error("offset {offset} is not interior to edge `{edge}`")]
    OffsetOutOfRange { edge: String, offset: String },
    #[error("point {0} does not lie on this graph")]
    PointNotOnGraph(String),
}

/// A finite multigraph with exact rational (or infinite) edge lengths.
///
/// Vertex and edge ids are opaque strings. Edge endpoints are ordered: the
/// first endpoint is the origin for interior-point offsets. Values are
/// immutable after construction; all operations are pure functions.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertex_ids: Vec<String>,
    vertex_index: HashMap<String, usize>,
    edges: Vec<EdgeData>,
    edge_index: HashMap<String, usize>,
    adjacency: Vec<Vec<Incidence>>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Incidence {
    pub edge: usize,
    pub other: usize,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_ids == other.vertex_ids
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(other.edges.iter())
                .all(|(a, b)| a.id == b.id && a.ends == b.ends && a.length == b.length)
    }
}

impl Eq for MetricGraph {}

impl MetricGraph {
    /// Builds a graph from vertex ids and `(edge id, end, end, length)` rows.
    ///
    /// Construction checks only referential integrity (unique ids, known
    /// endpoints); metric invariants are reported by [`validate`].
    ///
    /// [`validate`]: MetricGraph::validate
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String, String, EdgeLength)>,
    {
        let mut vertex_ids = Vec::new();
        let mut vertex_index = HashMap::new();
        for v in vertices {
            if vertex_index.insert(v.clone(), vertex_ids.len()).is_some() {
                return Err(GraphError::DuplicateVertex(v));
            }
            vertex_ids.push(v);
        }
        let mut edge_list = Vec::new();
        let mut edge_index = HashMap::new();
        for (id, a, b, length) in edges {
            let ai = *vertex_index
                .get(&a)
                .ok_or_else(|| GraphError::UnknownEndpoint {
                    edge: id.clone(),
                    vertex: a.clone(),
                })?;
            let bi = *vertex_index
                .get(&b)
                .ok_or_else(|| GraphError::UnknownEndpoint {
                    edge: id.clone(),
                    vertex: b.clone(),
                })?;
            if edge_index.insert(id.clone(), edge_list.len()).is_some() {
                return Err(GraphError::DuplicateEdge(id));
            }
            edge_list.push(EdgeData {
                id,
                ends: (ai, bi),
                length,
            });
        }
        let mut adjacency = vec![Vec::new(); vertex_ids.len()];
        for (ei, e) in edge_list.iter().enumerate() {
            adjacency[e.ends.0].push(Incidence {
                edge: ei,
                other: e.ends.1,
            });
            if e.ends.0 != e.ends.1 {
                adjacency[e.ends.1].push(Incidence {
                    edge: ei,
                    other: e.ends.0,
                });
            }
        }
        Ok(MetricGraph {
            vertex_ids,
            vertex_index,
            edges: edge_list,
            edge_index,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &str> {
        self.vertex_ids.iter().map(String::as_str)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &str> {
        self.edges.iter().map(|e| e.id.as_str())
    }

    pub fn has_vertex(&self, id: &str) -> bool {
        self.vertex_index.contains_key(id)
    }

    pub fn has_edge(&self, id: &str) -> bool {
        self.edge_index.contains_key(id)
    }

    pub fn edge_length(&self, id: &str) -> Result<EdgeLength, GraphError> {
        Ok(self.edges[self.edge_idx(id)?].length)
    }

    pub fn edge_ends(&self, id: &str) -> Result<(&str, &str), GraphError> {
        let e = &self.edges[self.edge_idx(id)?];
        Ok((&self.vertex_ids[e.ends.0], &self.vertex_ids[e.ends.1]))
    }

    pub(crate) fn vertex_idx(&self, id: &str) -> Result<usize, GraphError> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub(crate) fn edge_idx(&self, id: &str) -> Result<usize, GraphError> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    pub(crate) fn vertex_id(&self, idx: usize) -> &str {
        &self.vertex_ids[idx]
    }

    pub(crate) fn edge_data(&self, idx: usize) -> &EdgeData {
        &self.edges[idx]
    }

    pub(crate) fn edges_iter(&self) -> impl Iterator<Item = &EdgeData> {
        self.edges.iter()
    }

    pub(crate) fn incidences(&self, vertex: usize) -> &[Incidence] {
        &self.adjacency[vertex]
    }

    /// Number of edge-ends at a vertex (equals valence; loops are forbidden).
    pub fn vertex_valence(&self, id: &str) -> Result<usize, GraphError> {
        Ok(self.adjacency[self.vertex_idx(id)?].len())
    }

    /// Valence of an arbitrary point: interior points have valence 2.
    pub fn valence(&self, p: &PointRef) -> Result<usize, GraphError> {
        match p {
            PointRef::Vertex(v) => self.vertex_valence(v),
            PointRef::Interior { edge, offset } => {
                self.check_interior(edge, offset)?;
                Ok(2)
            }
        }
    }

    /// Checks that an interior point reference actually lies strictly inside
    /// a finite edge.
    pub(crate) fn check_interior(&self, edge: &str, offset: &Rat) -> Result<(), GraphError> {
        let e = &self.edges[self.edge_idx(edge)?];
        match e.length {
            EdgeLength::Infinite => Err(GraphError::InfiniteEdge(edge.to_string())),
            EdgeLength::Finite(len) => {
                if offset <= &Rat::zero() || offset >= &len {
                    Err(GraphError::OffsetOutOfRange {
                        edge: edge.to_string(),
                        offset: format_rat(offset),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Checks that a point lies on this graph.
    pub fn check_point(&self, p: &PointRef) -> Result<(), GraphError> {
        match p {
            PointRef::Vertex(v) => self.vertex_idx(v).map(|_| ()),
            PointRef::Interior { edge, offset } => self.check_interior(edge, offset),
        }
    }

    /// The tangent directions at a point; their count equals the valence.
    pub fn tangent_directions(&self, p: &PointRef) -> Result<Vec<TangentDirection>, GraphError> {
        match p {
            PointRef::Vertex(v) => {
                let vi = self.vertex_idx(v)?;
                Ok(self.adjacency[vi]
                    .iter()
                    .map(|inc| {
                        let e = &self.edges[inc.edge];
                        TangentDirection {
                            base: p.clone(),
                            edge: e.id.clone(),
                            toward_second_end: e.ends.0 == vi,
                        }
                    })
                    .collect())
            }
            PointRef::Interior { edge, offset } => {
                self.check_interior(edge, offset)?;
                Ok(vec![
                    TangentDirection {
                        base: p.clone(),
                        edge: edge.clone(),
                        toward_second_end: false,
                    },
                    TangentDirection {
                        base: p.clone(),
                        edge: edge.clone(),
                        toward_second_end: true,
                    },
                ])
            }
        }
    }

    pub fn has_infinite_edge(&self) -> bool {
        self.edges.iter().any(|e| e.length.is_infinite())
    }

    /// Returns the id of some infinite edge, if one exists.
    pub fn first_infinite_edge(&self) -> Option<&str> {
        self.edges
            .iter()
            .find(|e| e.length.is_infinite())
            .map(|e| e.id.as_str())
    }

    /// Checks all metric-graph invariants; an empty list means the graph is
    /// well-formed. Each violation names the offending vertex or edge.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.vertex_ids.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        for e in &self.edges {
            if e.ends.0 == e.ends.1 {
                out.push(Violation::LoopEdge { edge: e.id.clone() });
            }
            match e.length {
                EdgeLength::Finite(len) => {
                    if len <= Rat::zero() {
                        out.push(Violation::NonpositiveLength { edge: e.id.clone() });
                    }
                }
                EdgeLength::Infinite => {
                    let v0 = self.adjacency[e.ends.0].len();
                    let v1 = self.adjacency[e.ends.1].len();
                    let leaf_ends = usize::from(v0 == 1) + usize::from(v1 == 1);
                    if e.ends.0 == e.ends.1 || leaf_ends != 1 {
                        out.push(Violation::InfiniteEdgeNotLeaf { edge: e.id.clone() });
                    }
                }
            }
        }
        // connectivity via BFS from vertex 0
        let mut seen = vec![false; self.vertex_ids.len()];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0usize);
        while let Some(v) = queue.pop_front() {
            for inc in &self.adjacency[v] {
                if !seen[inc.other] {
                    seen[inc.other] = true;
                    queue.push_back(inc.other);
                }
            }
        }
        for (i, s) in seen.iter().enumerate() {
            if !s {
                out.push(Violation::Disconnected {
                    vertex: self.vertex_ids[i].clone(),
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub(crate) fn ensure_valid(&self) -> Result<(), GraphError> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            Err(GraphError::Invalid(msgs.join("; ")))
        }
    }

    pub(crate) fn ensure_finite(&self) -> Result<(), GraphError> {
        match self.first_infinite_edge() {
            Some(e) => Err(GraphError::InfiniteEdge(e.to_string())),
            None => Ok(()),
        }
    }

    /// Genus (first Betti number) `|E| - |V| + 1`.
    ///
    /// Infinite leaf edges contribute one edge and one vertex each, so they
    /// do not change the genus.
    pub fn genus(&self) -> Result<usize, GraphError> {
        self.ensure_valid()?;
        Ok(self.edges.len() + 1 - self.vertex_ids.len())
    }

    /// Multiplies every length by the least common denominator, making all
    /// lengths integral. Returns the scaled graph and the scale used.
    ///
    /// Global scaling does not affect divisor-theoretic quantities (rank,
    /// linear equivalence, gonality).
    pub fn integerize(&self) -> Result<(MetricGraph, Rat), GraphError> {
        self.ensure_finite()?;
        let lengths: Vec<Rat> = self
            .edges
            .iter()
            .map(|e| e.length.finite().expect("finite checked"))
            .collect();
        let scale = lcm_of_denominators(lengths.iter());
        let scale_rat = Rat::from_integer(scale);
        let graph = MetricGraph::new(
            self.vertex_ids.clone(),
            self.edges.iter().map(|e| {
                (
                    e.id.clone(),
                    self.vertex_ids[e.ends.0].clone(),
                    self.vertex_ids[e.ends.1].clone(),
                    EdgeLength::Finite(e.length.finite().unwrap() * scale_rat),
                )
            }),
        )
        .expect("ids unchanged");
        Ok((graph, scale_rat))
    }

    /// Splits every finite edge into `parts` equal segments, inserting
    /// `parts - 1` fresh 2-valent vertices per edge. Genus is preserved.
    pub fn subdivide(&self, parts: u32) -> Result<Subdivided, GraphError> {
        if parts == 0 {
            return Err(GraphError::ZeroParts);
        }
        self.ensure_finite()?;
        let mut vertices: Vec<String> = self.vertex_ids.clone();
        let mut edges: Vec<(String, String, String, EdgeLength)> = Vec::new();
        for e in &self.edges {
            let len = e.length.finite().unwrap();
            let seg = EdgeLength::Finite(len / Rat::from_integer(i64::from(parts)));
            let mut prev = self.vertex_ids[e.ends.0].clone();
            for k in 1..=parts {
                let next = if k == parts {
                    self.vertex_ids[e.ends.1].clone()
                } else {
                    let v = format!("{}:v{}", e.id, k);
                    vertices.push(v.clone());
                    v
                };
                edges.push((format!("{}:s{}", e.id, k), prev.clone(), next.clone(), seg));
                prev = next;
            }
        }
        let graph = MetricGraph::new(vertices, edges)?;
        Ok(Subdivided {
            graph,
            parts,
            source_edge_lengths: self
                .edges
                .iter()
                .map(|e| (e.id.clone(), e.length.finite().unwrap()))
                .collect(),
        })
    }

    /// Deterministic default base point: the first vertex.
    pub fn first_vertex(&self) -> Option<PointRef> {
        self.vertex_ids.first().map(|v| PointRef::Vertex(v.clone()))
    }
}

/// Result of [`MetricGraph::subdivide`]: the refined graph plus the mapping
/// from points of the original graph to points of the refinement.
#[derive(Debug, Clone)]
pub struct Subdivided {
    pub graph: MetricGraph,
    pub parts: u32,
    source_edge_lengths: HashMap<String, Rat>,
}

impl Subdivided {
    /// Maps a point of the source graph into the subdivided graph.
    ///
    /// Old vertices map to themselves; an interior point at a lattice offset
    /// `k * len / parts` maps to the inserted vertex, other interior points
    /// to the interior of the segment containing them.
    pub fn map_point(&self, p: &PointRef) -> Result<PointRef, GraphError> {
        match p {
            PointRef::Vertex(v) => Ok(PointRef::Vertex(v.clone())),
            PointRef::Interior { edge, offset } => {
                let len = *self
                    .source_edge_lengths
                    .get(edge)
                    .ok_or_else(|| GraphError::UnknownEdge(edge.clone()))?;
                let seg_len = len / Rat::from_integer(i64::from(self.parts));
                let ratio = offset / seg_len;
                if ratio.is_integer() {
                    let k = ratio.to_integer();
                    if k <= 0 || k >= i64::from(self.parts) {
                        return Err(GraphError::OffsetOutOfRange {
                            edge: edge.clone(),
                            offset: format_rat(offset),
                        });
                    }
                    Ok(PointRef::Vertex(format!("{edge}:v{k}")))
                } else {
                    let k = ratio.floor().to_integer();
                    if k < 0 || k >= i64::from(self.parts) {
                        return Err(GraphError::OffsetOutOfRange {
                            edge: edge.clone(),
                            offset: format_rat(offset),
                        });
                    }
                    let local = offset - seg_len * Rat::from_integer(k);
                    Ok(PointRef::Interior {
                        edge: format!("{edge}:s{}", k + 1),
                        offset: local,
                    })
                }
            }
        }
    }
}

/// Convenience: unit-length complete graph on `d` labeled vertices
/// `v1..vd`. Used pervasively in tests; family generators live in
/// [`crate::families`].
pub fn complete_graph(d: u32) -> MetricGraph {
    complete_graph_with_length(d, Rat::from_integer(1))
}

pub fn complete_graph_with_length(d: u32, len: Rat) -> MetricGraph {
    let vertices: Vec<String> = (1..=d).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 1..=d {
        for j in (i + 1)..=d {
            edges.push((
                format!("v{i}-v{j}"),
                format!("v{i}"),
                format!("v{j}"),
                EdgeLength::Finite(len),
            ));
        }
    }
    MetricGraph::new(vertices, edges).expect("complete graph ids are unique")
}

/// `K_{m,n}` with unit lengths, parts `v1..vm` and `w1..wn`.
pub fn complete_bipartite_graph(m: u32, n: u32) -> MetricGraph {
    let mut vertices: Vec<String> = (1..=m).map(|i| format!("v{i}")).collect();
    vertices.extend((1..=n).map(|j| format!("w{j}")));
    let mut edges = Vec::new();
    for i in 1..=m {
        for j in 1..=n {
            edges.push((
                format!("v{i}-w{j}"),
                format!("v{i}"),
                format!("w{j}"),
                EdgeLength::Finite(Rat::from_integer(1)),
            ));
        }
    }
    MetricGraph::new(vertices, edges).expect("bipartite ids are unique")
}

/// Set of vertex ids reachable from `start`, for quick connectivity probes
/// on ad-hoc subgraphs (used by the family generators).
pub(crate) fn reachable(adj: &HashMap<String, HashSet<String>>, start: &str) -> HashSet<String> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.to_string());
    queue.push_back(start.to_string());
    while let Some(v) = queue.pop_front() {
        if let Some(ns) = adj.get(&v) {
            for n in ns {
                if seen.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
            }
        }
    }
    seen
}
