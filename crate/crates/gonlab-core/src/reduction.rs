//! Dhar's burning algorithm, reducedness tests, and q-reduced divisors.
//!
//! All computations run on the integer lattice model ([`LatticeModel`]):
//! fire spreads from the base point node by node, and a node blocks the
//! fire exactly when its chip count is at least the number of burning
//! directions reaching it. A divisor is q-reduced iff it is effective away
//! from q and the whole graph burns down.

use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, MetricGraph, PointRef};
use crate::lattice::{required_subdivision, LatticeError, LatticeModel};
use crate::rational::Rat;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReduceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("divisor is negative at {point}, which is not the base point")]
    NegativeAwayFromBase { point: String },
}

/// Options shared by the reduction entry points.
///
/// When `subdivision` is `None` the least level making all inputs
/// lattice-supported is used.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReduceOptions {
    pub subdivision: Option<u32>,
}

impl ReduceOptions {
    pub fn with_subdivision(s: u32) -> Self {
        ReduceOptions {
            subdivision: Some(s),
        }
    }
}

/// A maximal unburnt closed segment of an edge, in original length units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnburntSegment {
    pub edge: String,
    pub from: Rat,
    pub to: Rat,
}

/// Outcome of running the burning algorithm from a base point.
#[derive(Debug, Clone)]
pub struct BurnReport {
    pub base: PointRef,
    /// Lattice points reached by the fire.
    pub burnt: Vec<PointRef>,
    /// Lattice points never reached; empty iff the divisor is reduced.
    pub unburnt: Vec<PointRef>,
    /// Maximal closed edge segments untouched by the fire.
    pub unburnt_segments: Vec<UnburntSegment>,
    /// First point taken by the fire beyond the base: a non-saturated
    /// boundary point of the initial front. `None` when the fire never
    /// advanced (every neighbor of the base was saturated).
    pub nonsaturated_witness: Option<PointRef>,
}

impl BurnReport {
    pub fn fully_burnt(&self) -> bool {
        self.unburnt.is_empty()
    }
}

pub(crate) struct BurnOutcome {
    pub burnt: Vec<bool>,
    pub first_advance: Option<usize>,
}

/// Dhar's burning algorithm on the lattice model. `chips` must be
/// effective away from `q`.
pub(crate) fn burn_nodes(model: &LatticeModel, chips: &[i64], q: usize) -> BurnOutcome {
    let n = model.node_count();
    let mut burnt = vec![false; n];
    let mut incoming = vec![0i64; n];
    let mut stack = vec![q];
    burnt[q] = true;
    let mut first_advance = None;
    while let Some(v) = stack.pop() {
        for &w in model.neighbors(v) {
            if burnt[w] {
                continue;
            }
            incoming[w] += 1;
            if incoming[w] > chips[w] {
                burnt[w] = true;
                if first_advance.is_none() {
                    first_advance = Some(w);
                }
                stack.push(w);
            }
        }
    }
    BurnOutcome {
        burnt,
        first_advance,
    }
}

/// Moves all debt onto `q`: after this, every node other than `q` holds a
/// nonnegative chip count. Works by pulling chips inward along breadth-first
/// layers, outermost layer first; each pull is a legal set-firing of a ball
/// around `q`, so linear equivalence is preserved.
fn collect_debt(model: &LatticeModel, chips: &mut [i64], q: usize) {
    let n = model.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    dist[q] = 0;
    order.push(q);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in model.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                order.push(w);
            }
        }
    }
    let max_dist = order.iter().map(|&v| dist[v]).max().unwrap_or(0);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); max_dist + 1];
    for &v in &order {
        layers[dist[v]].push(v);
    }
    for r in (0..max_dist).rev() {
        // multiplicity needed so that every node of layer r+1 ends up
        // nonnegative; each unfiring sends one chip along every edge from
        // layer r to layer r+1
        let mut pulls: i64 = 0;
        for &v in &layers[r + 1] {
            if chips[v] < 0 {
                let inward = model
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| dist[u] == r)
                    .count() as i64;
                debug_assert!(inward >= 1, "BFS layer must have an inward edge");
                let need = (-chips[v] + inward - 1) / inward;
                pulls = pulls.max(need);
            }
        }
        if pulls == 0 {
            continue;
        }
        for &v in &layers[r + 1] {
            for &u in model.neighbors(v) {
                if dist[u] == r {
                    chips[v] += pulls;
                    chips[u] -= pulls;
                }
            }
        }
    }
}

/// Computes the q-reduced chip vector linearly equivalent to `chips`.
pub(crate) fn reduce_vec(model: &LatticeModel, mut chips: Vec<i64>, q: usize) -> Vec<i64> {
    collect_debt(model, &mut chips, q);
    let positive: i64 = chips.iter().filter(|c| **c > 0).sum();
    // the lattice Dhar loop terminates; the budget turns a would-be hang
    // into a loud failure (padded so it stays positive on trees and for
    // chip-free divisors)
    let budget = (model.node_count() as i64 + 1) * (positive + 1) * (model.genus() as i64 + 2);
    let mut rounds: i64 = 0;
    loop {
        let outcome = burn_nodes(model, &chips, q);
        let unburnt: Vec<usize> = (0..model.node_count())
            .filter(|&v| !outcome.burnt[v])
            .collect();
        if unburnt.is_empty() {
            return chips;
        }
        rounds += 1;
        assert!(
            rounds <= budget,
            "reduction did not terminate within {budget} Dhar rounds; this is a bug"
        );
        // fire the whole unburnt set as many times as saturation allows
        let mut multiplicity = i64::MAX;
        for &v in &unburnt {
            let boundary = model
                .neighbors(v)
                .iter()
                .filter(|&&u| outcome.burnt[u])
                .count() as i64;
            if boundary > 0 {
                multiplicity = multiplicity.min(chips[v] / boundary);
            }
        }
        let multiplicity = multiplicity.max(1);
        for &v in &unburnt {
            for &u in model.neighbors(v) {
                if outcome.burnt[u] {
                    chips[v] -= multiplicity;
                    chips[u] += multiplicity;
                }
            }
        }
    }
}

fn model_for(
    g: &MetricGraph,
    divisors: &[&Divisor],
    q: &PointRef,
    opts: ReduceOptions,
) -> Result<LatticeModel, ReduceError> {
    let s = match opts.subdivision {
        Some(s) => s,
        None => {
            let mut pts: Vec<&PointRef> = divisors.iter().flat_map(|d| d.support()).collect();
            pts.push(q);
            required_subdivision(g, pts)?
        }
    };
    Ok(LatticeModel::new(g, s)?)
}

fn ensure_effective_away(d: &Divisor, q: &PointRef) -> Result<(), ReduceError> {
    for (p, c) in d.iter() {
        if c < 0 && p != q {
            return Err(ReduceError::NegativeAwayFromBase {
                point: p.to_string(),
            });
        }
    }
    Ok(())
}

/// Runs the burning algorithm for `d` from base `q`.
///
/// Requires `d` effective away from `q`; the unburnt set in the report is
/// the maximal closed saturated set (empty iff `d` is q-reduced).
pub fn burn(
    g: &MetricGraph,
    d: &Divisor,
    q: &PointRef,
    opts: ReduceOptions,
) -> Result<BurnReport, ReduceError> {
    d.validate_on(g).map_err(|e| match e {
        crate::divisor::DivisorError::Graph(g) => ReduceError::Graph(g),
    })?;
    ensure_effective_away(d, q)?;
    let model = model_for(g, &[d], q, opts)?;
    let chips = model.divisor_to_vec(d)?;
    let q_node = model.node_of_point(q)?;
    let outcome = burn_nodes(&model, &chips, q_node);
    Ok(report_from_outcome(&model, &outcome, q.clone()))
}

fn report_from_outcome(model: &LatticeModel, outcome: &BurnOutcome, base: PointRef) -> BurnReport {
    let mut burnt = Vec::new();
    let mut unburnt = Vec::new();
    for v in 0..model.node_count() {
        if outcome.burnt[v] {
            burnt.push(model.point_of_node(v));
        } else {
            unburnt.push(model.point_of_node(v));
        }
    }
    let mut segments = Vec::new();
    let g = model.graph();
    for (ei, edge) in g.edges_iter().enumerate() {
        let steps = model.steps_of_edge(ei);
        let node_at = |k: i64| -> usize {
            if k == 0 {
                model
                    .node_of_point(&PointRef::vertex(g.vertex_id(edge.ends.0)))
                    .expect("vertex node")
            } else if k == steps {
                model
                    .node_of_point(&PointRef::vertex(g.vertex_id(edge.ends.1)))
                    .expect("vertex node")
            } else {
                let len = edge.length.finite().expect("lattice model is finite");
                model
                    .node_of_point(&PointRef::interior(
                        edge.id.clone(),
                        len * Rat::new(k, steps),
                    ))
                    .expect("interior node")
            }
        };
        let len = edge.length.finite().expect("lattice model is finite");
        let mut run_start: Option<i64> = None;
        for k in 0..=steps {
            let node_unburnt = !outcome.burnt[node_at(k)];
            match (node_unburnt, run_start) {
                (true, None) => run_start = Some(k),
                (false, Some(start)) => {
                    if k - 1 > start {
                        segments.push(UnburntSegment {
                            edge: edge.id.clone(),
                            from: len * Rat::new(start, steps),
                            to: len * Rat::new(k - 1, steps),
                        });
                    }
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(start) = run_start {
            if steps > start {
                segments.push(UnburntSegment {
                    edge: edge.id.clone(),
                    from: len * Rat::new(start, steps),
                    to: len,
                });
            }
        }
    }
    BurnReport {
        base,
        burnt,
        unburnt,
        unburnt_segments: segments,
        nonsaturated_witness: outcome.first_advance.map(|v| model.point_of_node(v)),
    }
}

/// True iff `d` is reduced with respect to `q`: effective away from `q`
/// and the whole graph burns down.
pub fn is_reduced(
    g: &MetricGraph,
    d: &Divisor,
    q: &PointRef,
    opts: ReduceOptions,
) -> Result<bool, ReduceError> {
    d.validate_on(g).map_err(|e| match e {
        crate::divisor::DivisorError::Graph(g) => ReduceError::Graph(g),
    })?;
    if !d.is_effective_away_from(q) {
        return Ok(false);
    }
    let report = burn(g, d, q, opts)?;
    Ok(report.fully_burnt())
}

/// The unique q-reduced divisor linearly equivalent to `d`.
pub fn reduce(
    g: &MetricGraph,
    d: &Divisor,
    q: &PointRef,
    opts: ReduceOptions,
) -> Result<Divisor, ReduceError> {
    d.validate_on(g).map_err(|e| match e {
        crate::divisor::DivisorError::Graph(g) => ReduceError::Graph(g),
    })?;
    g.check_point(q)?;
    let model = model_for(g, &[d], q, opts)?;
    let chips = model.divisor_to_vec(d)?;
    let q_node = model.node_of_point(q)?;
    let reduced = reduce_vec(&model, chips, q_node);
    Ok(model.vec_to_divisor(&reduced))
}

/// Linear equivalence test: compares q-reduced forms for the first vertex
/// as base point (any base gives the same answer, by uniqueness of the
/// reduced representative).
pub fn linearly_equivalent(
    g: &MetricGraph,
    d1: &Divisor,
    d2: &Divisor,
    opts: ReduceOptions,
) -> Result<bool, ReduceError> {
    if d1.degree() != d2.degree() {
        return Ok(false);
    }
    d1.validate_on(g).map_err(|e| match e {
        crate::divisor::DivisorError::Graph(g) => ReduceError::Graph(g),
    })?;
    d2.validate_on(g).map_err(|e| match e {
        crate::divisor::DivisorError::Graph(g) => ReduceError::Graph(g),
    })?;
    let q = g
        .first_vertex()
        .ok_or_else(|| GraphError::Invalid("graph has no vertices".into()))?;
    let model = model_for(g, &[d1, d2], &q, opts)?;
    let q_node = model.node_of_point(&q)?;
    let r1 = reduce_vec(&model, model.divisor_to_vec(d1)?, q_node);
    let r2 = reduce_vec(&model, model.divisor_to_vec(d2)?, q_node);
    Ok(r1 == r2)
}
