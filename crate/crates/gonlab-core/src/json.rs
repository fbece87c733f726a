//! JSON wire formats.
//!
//! Graphs: `{"vertices":["v1",...],"edges":[{"id":"e1","ends":["v1","v2"],
//! "length":"1"}]}` with decimal-free rational length strings (`"3/2"`) or
//! `"inf"`.
//!
//! Divisors: `[{"at":{"vertex":"v1"},"coeff":2},
//! {"at":{"edge":"e3","offset":"1/2"},"coeff":1}]`.
//!
//! Morphisms: `{"source":...,"target":...,"vertex_map":{...},
//! "edge_map":{"e7":"f2","e9":{"vertex":"u2"}},"dilation":{...}}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::{EdgeLength, GraphError, MetricGraph, PointRef};
use crate::harmonic::{EdgeImage, GraphMorphism, HarmonicReport, LiftabilityCertificate};
use crate::rank::{ExhaustionRecord, GonalityCertificate};
use crate::rational::{format_rat, parse_rat, RatParseError};
use crate::reduction::{BurnReport, UnburntSegment};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("json: {0}")]
    Syntax(String),
    #[error(transparent)]
    Rational(#[from] RatParseError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Syntax(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct GraphWire {
    vertices: Vec<String>,
    edges: Vec<EdgeWire>,
}

#[derive(Serialize, Deserialize)]
struct EdgeWire {
    id: String,
    ends: [String; 2],
    length: String,
}

fn length_to_string(l: &EdgeLength) -> String {
    match l {
        EdgeLength::Finite(r) => format_rat(r),
        EdgeLength::Infinite => "inf".to_string(),
    }
}

fn length_from_string(s: &str) -> Result<EdgeLength, JsonError> {
    if s.trim() == "inf" {
        Ok(EdgeLength::Infinite)
    } else {
        Ok(EdgeLength::Finite(parse_rat(s)?))
    }
}

pub fn graph_to_json(g: &MetricGraph) -> String {
    let wire = GraphWire {
        vertices: g.vertex_ids().map(str::to_string).collect(),
        edges: g
            .edge_ids()
            .map(|e| {
                let (a, b) = g.edge_ends(e).expect("edge exists");
                EdgeWire {
                    id: e.to_string(),
                    ends: [a.to_string(), b.to_string()],
                    length: length_to_string(&g.edge_length(e).expect("edge exists")),
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

pub fn graph_from_json(s: &str) -> Result<MetricGraph, JsonError> {
    let wire: GraphWire = serde_json::from_str(s)?;
    let mut edges = Vec::with_capacity(wire.edges.len());
    for e in wire.edges {
        let [a, b] = e.ends;
        edges.push((e.id, a, b, length_from_string(&e.length)?));
    }
    Ok(MetricGraph::new(wire.vertices, edges)?)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointWire {
    Vertex { vertex: String },
    Interior { edge: String, offset: String },
}

impl PointWire {
    fn from_point(p: &PointRef) -> PointWire {
        match p {
            PointRef::Vertex(v) => PointWire::Vertex { vertex: v.clone() },
            PointRef::Interior { edge, offset } => PointWire::Interior {
                edge: edge.clone(),
                offset: format_rat(offset),
            },
        }
    }

    fn into_point(self) -> Result<PointRef, JsonError> {
        Ok(match self {
            PointWire::Vertex { vertex } => PointRef::Vertex(vertex),
            PointWire::Interior { edge, offset } => PointRef::Interior {
                edge,
                offset: parse_rat(&offset)?,
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DivisorEntryWire {
    at: PointWire,
    coeff: i64,
}

pub fn divisor_to_json(d: &Divisor) -> String {
    let wire: Vec<DivisorEntryWire> = d
        .iter()
        .map(|(p, c)| DivisorEntryWire {
            at: PointWire::from_point(p),
            coeff: c,
        })
        .collect();
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

pub fn divisor_from_json(s: &str) -> Result<Divisor, JsonError> {
    let wire: Vec<DivisorEntryWire> = serde_json::from_str(s)?;
    let mut d = Divisor::zero();
    for entry in wire {
        d.add_coeff(entry.at.into_point()?, entry.coeff);
    }
    Ok(d)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeImageWire {
    Edge(String),
    Vertex { vertex: String },
}

#[derive(Serialize, Deserialize)]
struct MorphismWire {
    source: GraphWire,
    target: GraphWire,
    vertex_map: BTreeMap<String, String>,
    edge_map: BTreeMap<String, EdgeImageWire>,
    dilation: BTreeMap<String, u32>,
}

pub fn morphism_to_json(m: &GraphMorphism) -> String {
    let source: GraphWire = serde_json::from_str(&graph_to_json(&m.source)).expect("round trip");
    let target: GraphWire = serde_json::from_str(&graph_to_json(&m.target)).expect("round trip");
    let wire = MorphismWire {
        source,
        target,
        vertex_map: m.vertex_map.clone(),
        edge_map: m
            .edge_map
            .iter()
            .map(|(e, img)| {
                let w = match img {
                    EdgeImage::Edge(f) => EdgeImageWire::Edge(f.clone()),
                    EdgeImage::Vertex(u) => EdgeImageWire::Vertex { vertex: u.clone() },
                };
                (e.clone(), w)
            })
            .collect(),
        dilation: m.dilation.clone(),
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

pub fn morphism_from_json(s: &str) -> Result<GraphMorphism, JsonError> {
    let wire: MorphismWire = serde_json::from_str(s)?;
    let source = graph_from_json(&serde_json::to_string(&wire.source)?)?;
    let target = graph_from_json(&serde_json::to_string(&wire.target)?)?;
    Ok(GraphMorphism {
        source,
        target,
        vertex_map: wire.vertex_map,
        edge_map: wire
            .edge_map
            .into_iter()
            .map(|(e, img)| {
                let img = match img {
                    EdgeImageWire::Edge(f) => EdgeImage::Edge(f),
                    EdgeImageWire::Vertex { vertex } => EdgeImage::Vertex(vertex),
                };
                (e, img)
            })
            .collect(),
        dilation: wire.dilation,
    })
}

#[derive(Serialize)]
struct CertificateWire {
    value: u32,
    witness: Vec<DivisorEntryWire>,
    exhaustion: ExhaustionWire,
}

#[derive(Serialize)]
struct ExhaustionWire {
    subdivision: u32,
    degree: u32,
    exhausted: bool,
}

pub fn certificate_to_json(c: &GonalityCertificate) -> String {
    let ExhaustionRecord {
        subdivision,
        degree,
        exhausted,
    } = c.exhaustion;
    let wire = CertificateWire {
        value: c.value,
        witness: c
            .witness
            .iter()
            .map(|(p, coeff)| DivisorEntryWire {
                at: PointWire::from_point(p),
                coeff,
            })
            .collect(),
        exhaustion: ExhaustionWire {
            subdivision,
            degree,
            exhausted,
        },
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

#[derive(Serialize)]
struct BurnWire {
    base: PointWire,
    fully_burnt: bool,
    burnt: Vec<PointWire>,
    unburnt: Vec<PointWire>,
    unburnt_segments: Vec<SegmentWire>,
    nonsaturated_witness: Option<PointWire>,
}

#[derive(Serialize)]
struct SegmentWire {
    edge: String,
    from: String,
    to: String,
}

pub fn burn_report_to_json(r: &BurnReport) -> String {
    let seg = |s: &UnburntSegment| SegmentWire {
        edge: s.edge.clone(),
        from: format_rat(&s.from),
        to: format_rat(&s.to),
    };
    let wire = BurnWire {
        base: PointWire::from_point(&r.base),
        fully_burnt: r.fully_burnt(),
        burnt: r.burnt.iter().map(PointWire::from_point).collect(),
        unburnt: r.unburnt.iter().map(PointWire::from_point).collect(),
        unburnt_segments: r.unburnt_segments.iter().map(seg).collect(),
        nonsaturated_witness: r.nonsaturated_witness.as_ref().map(PointWire::from_point),
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

#[derive(Serialize)]
struct HarmonicWire {
    harmonic: bool,
    global_degree: Option<u64>,
    local_degrees: BTreeMap<String, u64>,
    defects: Vec<String>,
}

pub fn harmonic_report_to_json(r: &HarmonicReport) -> String {
    let wire = HarmonicWire {
        harmonic: r.harmonic,
        global_degree: r.global_degree,
        local_degrees: r.local_degrees.clone(),
        defects: r.defects.iter().map(|d| d.to_string()).collect(),
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}

#[derive(Serialize)]
struct LiftabilityWire {
    verdict: bool,
    reason: String,
    partitions: BTreeMap<String, Vec<PartitionWire>>,
}

#[derive(Serialize)]
struct PartitionWire {
    direction: String,
    parts: Vec<u32>,
}

pub fn liftability_to_json(c: &LiftabilityCertificate) -> String {
    let wire = LiftabilityWire {
        verdict: c.verdict,
        reason: c.reason.clone(),
        partitions: c
            .partitions
            .iter()
            .map(|(p, dirs)| {
                (
                    p.clone(),
                    dirs.iter()
                        .map(|(direction, parts)| PartitionWire {
                            direction: direction.clone(),
                            parts: parts.clone(),
                        })
                        .collect(),
                )
            })
            .collect(),
    };
    serde_json::to_string_pretty(&wire).expect("serialization cannot fail")
}
