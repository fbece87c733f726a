//! The integer lattice model used by the reduction and rank machinery.
//!
//! Every reduction runs on a finite unit-length graph: the input graph is
//! rescaled so all lengths are integers (scale `L` = least common
//! denominator), then each edge of scaled length `n` is split into `n * s`
//! unit steps, where `s` is the chosen subdivision level. Divisors must be
//! supported on the lattice nodes of this model; chip-firing on the model is
//! equivalent to the metric computation for lattice-supported divisors.

use num_traits::Zero;
use std::collections::HashMap;

use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{GraphError, MetricGraph, PointRef};
use crate::rational::{lcm_of_denominators, Rat};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("point {point} is not supported on the lattice at subdivision {subdivision}")]
    NotLatticeSupported { point: String, subdivision: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeKind {
    Vertex(usize),
    /// Interior lattice node: edge index and step index `1..steps`.
    Interior(usize, i64),
}

/// Finite unit multigraph refining a metric graph at a given subdivision.
#[derive(Debug, Clone)]
pub struct LatticeModel {
    graph: MetricGraph,
    subdivision: u32,
    /// `L`: lengths times this are integers.
    denominator_scale: i64,
    /// Per original edge: number of unit steps (`len * L * s`).
    steps: Vec<i64>,
    node_kind: Vec<NodeKind>,
    vertex_node: Vec<usize>,
    interior_node: HashMap<(usize, i64), usize>,
    /// Unit adjacency; parallel unit edges appear as repeated entries.
    adj: Vec<Vec<usize>>,
    genus: usize,
}

impl LatticeModel {
    /// Builds the model. Requires a valid graph with finite rational lengths
    /// and `subdivision >= 1`.
    pub fn new(graph: &MetricGraph, subdivision: u32) -> Result<Self, LatticeError> {
        if subdivision == 0 {
            return Err(GraphError::ZeroParts.into());
        }
        graph.ensure_valid().map_err(LatticeError::Graph)?;
        graph.ensure_finite().map_err(LatticeError::Graph)?;
        let lengths: Vec<Rat> = graph
            .edges_iter()
            .map(|e| e.length.finite().expect("finite checked"))
            .collect();
        let scale = lcm_of_denominators(lengths.iter());
        let s = i64::from(subdivision);

        let n_vertices = graph.vertex_count();
        let mut node_kind: Vec<NodeKind> = (0..n_vertices).map(NodeKind::Vertex).collect();
        let vertex_node: Vec<usize> = (0..n_vertices).collect();
        let mut interior_node = HashMap::new();
        let mut steps = Vec::with_capacity(lengths.len());
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];

        for (ei, len) in lengths.iter().enumerate() {
            let scaled = len * Rat::from_integer(scale) * Rat::from_integer(s);
            debug_assert!(scaled.is_integer());
            let n_steps = scaled.to_integer();
            steps.push(n_steps);
            let ends = graph.edge_data(ei).ends;
            let mut prev = vertex_node[ends.0];
            for k in 1..=n_steps {
                let next = if k == n_steps {
                    vertex_node[ends.1]
                } else {
                    let node = node_kind.len();
                    node_kind.push(NodeKind::Interior(ei, k));
                    interior_node.insert((ei, k), node);
                    adj.push(Vec::new());
                    node
                };
                adj[prev].push(next);
                adj[next].push(prev);
                prev = next;
            }
        }

        let genus = graph.genus().map_err(LatticeError::Graph)?;
        Ok(LatticeModel {
            graph: graph.clone(),
            subdivision,
            denominator_scale: scale,
            steps,
            node_kind,
            vertex_node,
            interior_node,
            adj,
            genus,
        })
    }

    pub fn subdivision(&self) -> u32 {
        self.subdivision
    }

    pub fn node_count(&self) -> usize {
        self.node_kind.len()
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Unit-step neighbors of a node; parallel steps appear repeated.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adj[node]
    }

    /// Valence of a lattice node in the unit model.
    pub fn degree(&self, node: usize) -> usize {
        self.adj[node].len()
    }

    /// Lattice node of a point, if the point is lattice-supported.
    pub fn node_of_point(&self, p: &PointRef) -> Result<usize, LatticeError> {
        match p {
            PointRef::Vertex(v) => {
                let vi = self.graph.vertex_idx(v).map_err(LatticeError::Graph)?;
                Ok(self.vertex_node[vi])
            }
            PointRef::Interior { edge, offset } => {
                self.graph
                    .check_interior(edge, offset)
                    .map_err(LatticeError::Graph)?;
                let ei = self.graph.edge_idx(edge).map_err(LatticeError::Graph)?;
                let step = offset
                    * Rat::from_integer(self.denominator_scale)
                    * Rat::from_integer(i64::from(self.subdivision));
                if !step.is_integer() {
                    return Err(LatticeError::NotLatticeSupported {
                        point: p.to_string(),
                        subdivision: self.subdivision,
                    });
                }
                let k = step.to_integer();
                debug_assert!(k > 0 && k < self.steps[ei]);
                Ok(self.interior_node[&(ei, k)])
            }
        }
    }

    /// The metric point corresponding to a lattice node.
    pub fn point_of_node(&self, node: usize) -> PointRef {
        match self.node_kind[node] {
            NodeKind::Vertex(vi) => PointRef::vertex(self.graph.vertex_id(vi)),
            NodeKind::Interior(ei, k) => {
                let offset = Rat::new(
                    k,
                    self.denominator_scale * i64::from(self.subdivision),
                );
                PointRef::interior(self.graph.edge_data(ei).id.clone(), offset)
            }
        }
    }

    /// Converts a divisor to a chip vector indexed by lattice node.
    pub fn divisor_to_vec(&self, d: &Divisor) -> Result<Vec<i64>, LatticeError> {
        let mut out = vec![0i64; self.node_count()];
        for (p, c) in d.iter() {
            out[self.node_of_point(p)?] += c;
        }
        Ok(out)
    }

    /// Converts a chip vector back to a divisor on the metric graph.
    pub fn vec_to_divisor(&self, chips: &[i64]) -> Divisor {
        Divisor::new(
            chips
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(n, c)| (self.point_of_node(n), *c)),
        )
    }

    /// All lattice nodes as metric points, in deterministic node order
    /// (original vertices first).
    pub fn lattice_points(&self) -> Vec<PointRef> {
        (0..self.node_count()).map(|n| self.point_of_node(n)).collect()
    }

    /// Per-edge unit step count of this model.
    pub(crate) fn steps_of_edge(&self, ei: usize) -> i64 {
        self.steps[ei]
    }
}

/// Smallest subdivision making every given point lattice-supported on `g`.
///
/// This is the default used by the reduction and rank entry points when no
/// explicit subdivision is requested.
pub fn required_subdivision<'a, I>(g: &MetricGraph, points: I) -> Result<u32, LatticeError>
where
    I: IntoIterator<Item = &'a PointRef>,
{
    g.ensure_finite().map_err(LatticeError::Graph)?;
    let lengths: Vec<Rat> = g
        .edges_iter()
        .map(|e| e.length.finite().expect("finite checked"))
        .collect();
    let scale = Rat::from_integer(lcm_of_denominators(lengths.iter()));
    let mut needed: i64 = 1;
    for p in points {
        if let PointRef::Interior { edge, offset } = p {
            g.check_interior(edge, offset).map_err(LatticeError::Graph)?;
            let scaled = offset * scale;
            needed = num_integer::lcm(needed, *scaled.denom());
        }
    }
    u32::try_from(needed).map_err(|_| LatticeError::NotLatticeSupported {
        point: "(subdivision overflow)".to_string(),
        subdivision: u32::MAX,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, EdgeLength, MetricGraph};
    use crate::rational::rat;

    #[test]
    fn unit_k3_has_no_interior_nodes() {
        let model = LatticeModel::new(&complete_graph(3), 1).unwrap();
        assert_eq!(model.node_count(), 3);
        assert_eq!(model.degree(0), 2);
    }

    #[test]
    fn subdivision_two_adds_midpoints() {
        let model = LatticeModel::new(&complete_graph(3), 2).unwrap();
        assert_eq!(model.node_count(), 3 + 3);
        let mid = PointRef::interior("v1-v2", rat(1, 2));
        let n = model.node_of_point(&mid).unwrap();
        assert_eq!(model.point_of_node(n), mid);
        assert_eq!(model.degree(n), 2);
    }

    #[test]
    fn fractional_lengths_are_rescaled() {
        let g = MetricGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                ("e1".to_string(), "a".to_string(), "b".to_string(), EdgeLength::Finite(rat(1, 2))),
                ("e2".to_string(), "b".to_string(), "c".to_string(), EdgeLength::Finite(rat(1, 3))),
                ("e3".to_string(), "a".to_string(), "c".to_string(), EdgeLength::Finite(rat(1, 1))),
            ],
        )
        .unwrap();
        let model = LatticeModel::new(&g, 1).unwrap();
        // scaled lengths 3, 2, 6 -> 3 vertices + 2 + 1 + 5 interior nodes
        assert_eq!(model.node_count(), 11);
        // offsets measured in original units
        let p = PointRef::interior("e1", rat(1, 6));
        let n = model.node_of_point(&p).unwrap();
        assert_eq!(model.point_of_node(n), p);
    }

    #[test]
    fn off_lattice_point_is_rejected() {
        let model = LatticeModel::new(&complete_graph(3), 2).unwrap();
        let p = PointRef::interior("v1-v2", rat(1, 3));
        assert!(matches!(
            model.node_of_point(&p),
            Err(LatticeError::NotLatticeSupported { .. })
        ));
    }

    #[test]
    fn required_subdivision_examples() {
        let g = complete_graph(3);
        let pts = [
            PointRef::interior("v1-v2", rat(1, 2)),
            PointRef::interior("v1-v3", rat(1, 3)),
            PointRef::vertex("v1"),
        ];
        assert_eq!(required_subdivision(&g, pts.iter()).unwrap(), 6);
        assert_eq!(required_subdivision(&g, [].iter()).unwrap(), 1);
    }

    #[test]
    fn divisor_round_trip() {
        let g = complete_graph(3);
        let model = LatticeModel::new(&g, 2).unwrap();
        let d = Divisor::new([
            (PointRef::vertex("v1"), 2),
            (PointRef::interior("v2-v3", rat(1, 2)), -1),
        ]);
        let v = model.divisor_to_vec(&d).unwrap();
        assert_eq!(model.vec_to_divisor(&v), d);
        assert_eq!(v.iter().sum::<i64>(), d.degree());
    }
}
