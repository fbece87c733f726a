//! Continuous piecewise-linear functions with integer slopes, and their
//! principal divisors.
//!
//! A [`RationalFunction`] stores, per edge, the interior breakpoints and the
//! integer slope of each piece (measured from the edge's first endpoint).
//! Vertex values follow by continuity from the anchor vertex, which is
//! pinned to value 0; principal divisors do not depend on that constant.
//!
//! Chip-firing of a closed set for time `t` is provided as a constructor:
//! the firing of `A` corresponds to the function `-min(dist(., A), t)`.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use num_traits::Zero;
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, MetricGraph, PointRef};
use crate::rational::{format_rat, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge `{edge}`: {slopes} slopes for {breakpoints} breakpoints (need one more slope)")]
    PieceMismatch {
        edge: String,
        breakpoints: usize,
        slopes: usize,
    },
    #[error("edge `{edge}`: breakpoints must be strictly increasing and interior")]
    BadBreakpoints { edge: String },
    #[error("function is discontinuous around edge `{edge}`")]
    Discontinuous { edge: String },
    #[error("firing time must be positive, got {0}")]
    NonpositiveTime(String),
    #[error("firing set is empty")]
    EmptyFiringSet,
}

/// Piecewise data of a function along one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgePieces {
    /// Interior breakpoints, strictly increasing, in `(0, length)`.
    pub breakpoints: Vec<Rat>,
    /// Integer slopes, one per piece: `breakpoints.len() + 1` entries.
    pub slopes: Vec<i64>,
}

impl EdgePieces {
    pub fn constant() -> Self {
        EdgePieces {
            breakpoints: Vec::new(),
            slopes: vec![0],
        }
    }

    pub fn linear(slope: i64) -> Self {
        EdgePieces {
            breakpoints: Vec::new(),
            slopes: vec![slope],
        }
    }

    fn total_increment(&self, length: Rat) -> Rat {
        let mut total = Rat::zero();
        let mut prev = Rat::zero();
        for (i, slope) in self.slopes.iter().enumerate() {
            let next = if i < self.breakpoints.len() {
                self.breakpoints[i]
            } else {
                length
            };
            total += Rat::from_integer(*slope) * (next - prev);
            prev = next;
        }
        total
    }
}

/// A rational function on a metric graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pieces: BTreeMap<String, EdgePieces>,
    vertex_values: BTreeMap<String, Rat>,
}

impl RationalFunction {
    /// Builds a function from per-edge piece data. Edges not listed are
    /// constant. Continuity across every cycle is checked; the first vertex
    /// is anchored to value 0.
    pub fn new(
        g: &MetricGraph,
        pieces: BTreeMap<String, EdgePieces>,
    ) -> Result<Self, FunctionError> {
        g.ensure_valid()?;
        g.ensure_finite()?;
        let mut full: BTreeMap<String, EdgePieces> = BTreeMap::new();
        for eid in g.edge_ids() {
            let p = pieces.get(eid).cloned().unwrap_or_else(EdgePieces::constant);
            let len = g.edge_length(eid)?.finite().expect("finite checked");
            if p.slopes.len() != p.breakpoints.len() + 1 {
                return Err(FunctionError::PieceMismatch {
                    edge: eid.to_string(),
                    breakpoints: p.breakpoints.len(),
                    slopes: p.slopes.len(),
                });
            }
            let increasing = p
                .breakpoints
                .windows(2)
                .all(|w| w[0] < w[1]);
            let interior = p
                .breakpoints
                .iter()
                .all(|b| *b > Rat::zero() && *b < len);
            if !increasing || !interior {
                return Err(FunctionError::BadBreakpoints {
                    edge: eid.to_string(),
                });
            }
            full.insert(eid.to_string(), p);
        }
        for eid in pieces.keys() {
            if !g.has_edge(eid) {
                return Err(GraphError::UnknownEdge(eid.clone()).into());
            }
        }

        // propagate vertex values from the anchor and check cycles agree
        let mut values: BTreeMap<String, Rat> = BTreeMap::new();
        let anchor = g
            .vertex_ids()
            .next()
            .ok_or_else(|| GraphError::Invalid("graph has no vertices".into()))?
            .to_string();
        values.insert(anchor.clone(), Rat::zero());
        let mut queue = vec![anchor];
        while let Some(v) = queue.pop() {
            let v_val = values[&v];
            let vi = g.vertex_idx(&v)?;
            for inc in g.incidences(vi) {
                let e = g.edge_data(inc.edge);
                let len = e.length.finite().expect("finite checked");
                let delta = full[&e.id].total_increment(len);
                let (other, other_val) = if g.vertex_id(e.ends.0) == v {
                    (g.vertex_id(e.ends.1).to_string(), v_val + delta)
                } else {
                    (g.vertex_id(e.ends.0).to_string(), v_val - delta)
                };
                match values.get(&other) {
                    None => {
                        values.insert(other.clone(), other_val);
                        queue.push(other);
                    }
                    Some(existing) => {
                        if *existing != other_val {
                            return Err(FunctionError::Discontinuous {
                                edge: e.id.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(RationalFunction {
            pieces: full,
            vertex_values: values,
        })
    }

    /// The firing function of a closed set: `-min(dist(., A), t)`.
    ///
    /// Adding its principal divisor moves one chip a distance `t` outward
    /// along every tangent direction leaving `A`. The result is anchored
    /// like every other function (first vertex at value 0).
    pub fn from_set_firing(
        g: &MetricGraph,
        set: &FiringSet,
        t: Rat,
    ) -> Result<Self, FunctionError> {
        g.ensure_valid()?;
        g.ensure_finite()?;
        if t <= Rat::zero() {
            return Err(FunctionError::NonpositiveTime(format_rat(&t)));
        }
        if set.points.is_empty() && set.whole_edges.is_empty() {
            return Err(FunctionError::EmptyFiringSet);
        }
        for p in &set.points {
            g.check_point(p)?;
        }
        for e in &set.whole_edges {
            let _ = g
                .edge_length(e)?
                .finite()
                .ok_or_else(|| GraphError::InfiniteEdge(e.clone()))?;
        }

        let dist = vertex_distances(g, set)?;
        // interior sources per edge
        let mut interior_sources: BTreeMap<String, Vec<Rat>> = BTreeMap::new();
        for p in &set.points {
            if let PointRef::Interior { edge, offset } = p {
                interior_sources
                    .entry(edge.clone())
                    .or_default()
                    .push(*offset);
            }
        }

        let mut pieces = BTreeMap::new();
        for e in g.edges_iter() {
            let len = e.length.finite().expect("finite checked");
            if set.whole_edges.contains(&e.id) {
                pieces.insert(e.id.clone(), EdgePieces::constant());
                continue;
            }
            let da = dist[e.ends.0];
            let db = dist[e.ends.1];
            let sources = interior_sources
                .get(&e.id)
                .cloned()
                .unwrap_or_default();
            let envelope = clamped_distance_on_edge(da, db, len, &sources, t);
            // f = -min(dist, t): negate the slopes
            pieces.insert(
                e.id.clone(),
                EdgePieces {
                    breakpoints: envelope.breakpoints,
                    slopes: envelope.slopes.iter().map(|s| -s).collect(),
                },
            );
        }
        RationalFunction::new(g, pieces)
    }

    pub fn vertex_value(&self, v: &str) -> Option<Rat> {
        self.vertex_values.get(v).copied()
    }

    pub fn edge_pieces(&self, e: &str) -> Option<&EdgePieces> {
        self.pieces.get(e)
    }

    /// The principal divisor `div(f)`: coefficient at each point is the sum
    /// of the outgoing slopes. Always has degree 0.
    pub fn divisor(&self, g: &MetricGraph) -> Result<Divisor, FunctionError> {
        let mut d = Divisor::zero();
        for e in g.edges_iter() {
            let p = self
                .pieces
                .get(&e.id)
                .ok_or_else(|| GraphError::UnknownEdge(e.id.clone()))?;
            let first = *p.slopes.first().expect("at least one slope");
            let last = *p.slopes.last().expect("at least one slope");
            d.add_coeff(PointRef::vertex(g.vertex_id(e.ends.0)), first);
            d.add_coeff(PointRef::vertex(g.vertex_id(e.ends.1)), -last);
            for (i, b) in p.breakpoints.iter().enumerate() {
                d.add_coeff(
                    PointRef::interior(e.id.clone(), *b),
                    p.slopes[i + 1] - p.slopes[i],
                );
            }
        }
        Ok(d)
    }
}

/// A closed subset of a metric graph given by points and whole edges.
#[derive(Debug, Clone, Default)]
pub struct FiringSet {
    pub points: Vec<PointRef>,
    pub whole_edges: Vec<String>,
}

impl FiringSet {
    pub fn of_points<I: IntoIterator<Item = PointRef>>(points: I) -> Self {
        FiringSet {
            points: points.into_iter().collect(),
            whole_edges: Vec::new(),
        }
    }
}

/// The principal divisor of `f` on `g`.
pub fn principal_divisor(g: &MetricGraph, f: &RationalFunction) -> Result<Divisor, FunctionError> {
    f.divisor(g)
}

/// Exact multi-source Dijkstra over the vertices.
fn vertex_distances(g: &MetricGraph, set: &FiringSet) -> Result<Vec<Rat>, FunctionError> {
    let n = g.vertex_count();
    let mut dist: Vec<Option<Rat>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<(Rat, usize)>> = BinaryHeap::new();
    let offer = |dist: &mut Vec<Option<Rat>>,
                     heap: &mut BinaryHeap<Reverse<(Rat, usize)>>,
                     v: usize,
                     d: Rat| {
        if dist[v].is_none_or(|cur| d < cur) {
            dist[v] = Some(d);
            heap.push(Reverse((d, v)));
        }
    };
    for p in &set.points {
        match p {
            PointRef::Vertex(v) => {
                let vi = g.vertex_idx(v)?;
                offer(&mut dist, &mut heap, vi, Rat::zero());
            }
            PointRef::Interior { edge, offset } => {
                let e = g.edge_data(g.edge_idx(edge)?);
                let len = e.length.finite().expect("finite checked");
                offer(&mut dist, &mut heap, e.ends.0, *offset);
                offer(&mut dist, &mut heap, e.ends.1, len - offset);
            }
        }
    }
    for eid in &set.whole_edges {
        let e = g.edge_data(g.edge_idx(eid)?);
        offer(&mut dist, &mut heap, e.ends.0, Rat::zero());
        offer(&mut dist, &mut heap, e.ends.1, Rat::zero());
    }
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v] != Some(d) {
            continue;
        }
        let incs: Vec<_> = g.incidences(v).to_vec();
        for inc in incs {
            let len = g
                .edge_data(inc.edge)
                .length
                .finite()
                .expect("finite checked");
            offer(&mut dist, &mut heap, inc.other, d + len);
        }
    }
    Ok(dist
        .into_iter()
        .map(|d| d.expect("graph is connected"))
        .collect())
}

struct Envelope {
    breakpoints: Vec<Rat>,
    slopes: Vec<i64>,
}

/// Piecewise form of `min(dist(x, A), t)` along one edge, where `x` runs
/// from the first endpoint. `da`, `db` are the endpoint distances and
/// `sources` the offsets of set points interior to this edge.
fn clamped_distance_on_edge(da: Rat, db: Rat, len: Rat, sources: &[Rat], t: Rat) -> Envelope {
    // value of the clamped distance at x
    let eval = |x: Rat| -> Rat {
        let mut best = (da + x).min(db + len - x);
        for o in sources {
            let d = if x >= *o { x - o } else { *o - x };
            best = best.min(d);
        }
        best.min(t)
    };
    // candidate kinks: crossings of every pair of constituent affine pieces
    let mut lines: Vec<(Rat, i64)> = vec![(da, 1), (db + len, -1), (t, 0)];
    for o in sources {
        lines.push((-*o, 1));
        lines.push((*o, -1));
    }
    let mut cuts: Vec<Rat> = vec![Rat::zero(), len];
    for o in sources {
        cuts.push(*o);
    }
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let (c1, s1) = lines[i];
            let (c2, s2) = lines[j];
            if s1 == s2 {
                continue;
            }
            let x = (c2 - c1) / Rat::from_integer(s1 - s2);
            if x > Rat::zero() && x < len {
                cuts.push(x);
            }
        }
    }
    cuts.sort();
    cuts.dedup();

    // slope of each cell, merging equal-slope neighbors
    let mut breakpoints = Vec::new();
    let mut slopes: Vec<i64> = Vec::new();
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let slope_rat = (eval(x1) - eval(x0)) / (x1 - x0);
        debug_assert!(slope_rat.is_integer(), "distance envelope has integer slopes");
        let slope = slope_rat.to_integer();
        match slopes.last() {
            Some(prev) if *prev == slope => {}
            Some(_) => {
                breakpoints.push(x0);
                slopes.push(slope);
            }
            None => slopes.push(slope),
        }
    }
    if slopes.is_empty() {
        slopes.push(0);
    }
    Envelope {
        breakpoints,
        slopes,
    }
}
