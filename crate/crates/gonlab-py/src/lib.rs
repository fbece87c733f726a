//! Python bindings: metric graphs, divisors, reduction, rank, gonality,
//! and harmonic morphisms, driven from Python in-process.
//!
//! Graphs and divisors cross the boundary either as typed objects or as
//! the same JSON documents the CLI uses. Points are written `"v1"` for a
//! vertex and `"edge@offset"` (e.g. `"v1-v2@1/2"`) for an interior point.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gonlab_core::divisor::canonical_divisor;
use gonlab_core::families::{build, FamilySpec};
use gonlab_core::graph::{MetricGraph, PointRef};
use gonlab_core::harmonic::{
    build_sharp_morphism, fiber_divisor, is_effective_morphism, liftability_certificate,
    make_finite, GraphMorphism,
};
use gonlab_core::json;
use gonlab_core::rank::{
    gonality_search, rank as core_rank, riemann_roch_residual, GonalityOptions, RankOptions,
};
use gonlab_core::rational::parse_rat;
use gonlab_core::reduction::{
    is_reduced as core_is_reduced, linearly_equivalent as core_equivalent, reduce as core_reduce,
    ReduceOptions,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// `(harmonic, global_degree, local_degrees, defects)`.
type HarmonicSummary = (bool, Option<u64>, BTreeMap<String, u64>, Vec<String>);

fn parse_point(s: &str) -> PyResult<PointRef> {
    match s.split_once('@') {
        None => Ok(PointRef::vertex(s)),
        Some((edge, offset)) => Ok(PointRef::interior(edge, parse_rat(offset).map_err(value_err)?)),
    }
}

fn point_to_string(p: &PointRef) -> String {
    match p {
        PointRef::Vertex(v) => v.clone(),
        PointRef::Interior { edge, offset } => {
            format!("{edge}@{}", gonlab_core::rational::format_rat(offset))
        }
    }
}

/// A metric graph with exact rational edge lengths.
#[pyclass(name = "MetricGraph", skip_from_py_object)]
#[derive(Clone)]
struct PyMetricGraph {
    inner: MetricGraph,
}

#[pymethods]
impl PyMetricGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMetricGraph {
            inner: json::graph_from_json(text).map_err(value_err)?,
        })
    }

    /// The complete graph on d vertices, unit lengths.
    #[staticmethod]
    fn complete(d: u32) -> PyResult<Self> {
        Self::from_spec(&FamilySpec::complete(d))
    }

    /// K_d minus the clique on the first h vertices.
    #[staticmethod]
    fn kd_minus_kh(d: u32, h: u32) -> PyResult<Self> {
        Self::from_spec(&FamilySpec::kd_minus_kh(d, h))
    }

    /// K_d minus an explicit edge list, e.g. [("v1", "v2")].
    #[staticmethod]
    fn kd_minus_edges(d: u32, removed: Vec<(String, String)>) -> PyResult<Self> {
        Self::from_spec(&FamilySpec::kd_minus_edges(d, removed))
    }

    /// The complete bipartite graph K_{m,n}.
    #[staticmethod]
    fn bipartite(m: u32, n: u32) -> PyResult<Self> {
        Self::from_spec(&FamilySpec::bipartite(m, n))
    }

    /// The sharp family: K_d minus d-1 edges forming two stars with a
    /// shared leaf.
    #[staticmethod]
    fn sharp(d: u32, k1: u32) -> PyResult<Self> {
        Self::from_spec(&FamilySpec::sharp(d, k1))
    }

    fn to_json(&self) -> String {
        json::graph_to_json(&self.inner)
    }

    fn to_dot(&self) -> String {
        gonlab_core::dot::graph_to_dot(&self.inner)
    }

    fn vertices(&self) -> Vec<String> {
        self.inner.vertex_ids().map(str::to_string).collect()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn genus(&self) -> PyResult<usize> {
        self.inner.genus().map_err(value_err)
    }

    /// Invariant violations; an empty list means the graph is well-formed.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(|v| v.to_string()).collect()
    }

    fn subdivide(&self, parts: u32) -> PyResult<Self> {
        Ok(PyMetricGraph {
            inner: self.inner.subdivide(parts).map_err(value_err)?.graph,
        })
    }

    fn canonical_divisor(&self) -> PyResult<PyDivisor> {
        Ok(PyDivisor {
            inner: canonical_divisor(&self.inner).map_err(value_err)?,
        })
    }

    /// The q-reduced divisor equivalent to `divisor`.
    #[pyo3(signature = (divisor, base, subdivision=None))]
    fn reduce(
        &self,
        divisor: &PyDivisor,
        base: &str,
        subdivision: Option<u32>,
    ) -> PyResult<PyDivisor> {
        let q = parse_point(base)?;
        let reduced = core_reduce(&self.inner, &divisor.inner, &q, ReduceOptions { subdivision })
            .map_err(value_err)?;
        Ok(PyDivisor { inner: reduced })
    }

    #[pyo3(signature = (divisor, base, subdivision=None))]
    fn is_reduced(
        &self,
        divisor: &PyDivisor,
        base: &str,
        subdivision: Option<u32>,
    ) -> PyResult<bool> {
        let q = parse_point(base)?;
        core_is_reduced(&self.inner, &divisor.inner, &q, ReduceOptions { subdivision })
            .map_err(value_err)
    }

    #[pyo3(signature = (d1, d2, subdivision=None))]
    fn linearly_equivalent(
        &self,
        d1: &PyDivisor,
        d2: &PyDivisor,
        subdivision: Option<u32>,
    ) -> PyResult<bool> {
        core_equivalent(&self.inner, &d1.inner, &d2.inner, ReduceOptions { subdivision })
            .map_err(value_err)
    }

    #[pyo3(signature = (divisor, subdivision=None))]
    fn rank(&self, divisor: &PyDivisor, subdivision: Option<u32>) -> PyResult<i64> {
        let opts = RankOptions {
            subdivision,
            ..Default::default()
        };
        core_rank(&self.inner, &divisor.inner, &opts).map_err(value_err)
    }

    /// rank(D) - rank(K - D) - deg(D) - 1 + g; always 0.
    #[pyo3(signature = (divisor, subdivision=None))]
    fn riemann_roch_residual(
        &self,
        divisor: &PyDivisor,
        subdivision: Option<u32>,
    ) -> PyResult<i64> {
        let opts = RankOptions {
            subdivision,
            ..Default::default()
        };
        riemann_roch_residual(&self.inner, &divisor.inner, &opts).map_err(value_err)
    }

    /// Exhaustive gonality search on the lattice at the given subdivision.
    #[pyo3(signature = (subdivision=1, max_degree=None, jobs=1))]
    fn gonality(
        &self,
        subdivision: u32,
        max_degree: Option<u32>,
        jobs: usize,
    ) -> PyResult<PyGonality> {
        let cert = gonality_search(
            &self.inner,
            &GonalityOptions {
                subdivision,
                max_degree,
                jobs,
                ..Default::default()
            },
        )
        .map_err(value_err)?;
        Ok(PyGonality {
            value: cert.value,
            witness: PyDivisor {
                inner: cert.witness,
            },
            exhausted_degree: cert.exhaustion.degree,
            exhausted: cert.exhaustion.exhausted,
            subdivision: cert.exhaustion.subdivision,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricGraph({} vertices, {} edges)",
            self.inner.vertex_count(),
            self.inner.edge_count()
        )
    }
}

impl PyMetricGraph {
    fn from_spec(spec: &FamilySpec) -> PyResult<Self> {
        Ok(PyMetricGraph {
            inner: build(spec).map_err(value_err)?,
        })
    }
}

/// A divisor: a finite integer combination of points.
#[pyclass(name = "Divisor", skip_from_py_object)]
#[derive(Clone)]
struct PyDivisor {
    inner: gonlab_core::Divisor,
}

#[pymethods]
impl PyDivisor {
    /// Builds a divisor from `{point: coefficient}`, points written as
    /// `"v1"` or `"edge@offset"`.
    #[new]
    fn new(entries: BTreeMap<String, i64>) -> PyResult<Self> {
        let mut inner = gonlab_core::Divisor::zero();
        for (p, c) in entries {
            inner.add_coeff(parse_point(&p)?, c);
        }
        Ok(PyDivisor { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDivisor {
            inner: json::divisor_from_json(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        json::divisor_to_json(&self.inner)
    }

    fn degree(&self) -> i64 {
        self.inner.degree()
    }

    fn is_effective(&self) -> bool {
        self.inner.is_effective()
    }

    fn coeff(&self, point: &str) -> PyResult<i64> {
        Ok(self.inner.coeff(&parse_point(point)?))
    }

    /// The divisor as `{point: coefficient}`.
    fn entries(&self) -> BTreeMap<String, i64> {
        self.inner
            .iter()
            .map(|(p, c)| (point_to_string(p), c))
            .collect()
    }

    fn add(&self, other: &PyDivisor) -> PyDivisor {
        PyDivisor {
            inner: &self.inner + &other.inner,
        }
    }

    fn sub(&self, other: &PyDivisor) -> PyDivisor {
        PyDivisor {
            inner: &self.inner - &other.inner,
        }
    }

    fn __eq__(&self, other: &PyDivisor) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("Divisor({})", self.inner)
    }
}

/// Gonality search result.
#[pyclass(name = "GonalityCertificate")]
struct PyGonality {
    #[pyo3(get)]
    value: u32,
    #[pyo3(get)]
    witness: PyDivisor,
    /// The degree below the value that was exhausted without a hit.
    #[pyo3(get)]
    exhausted_degree: u32,
    #[pyo3(get)]
    exhausted: bool,
    #[pyo3(get)]
    subdivision: u32,
}

#[pymethods]
impl PyGonality {
    fn __repr__(&self) -> String {
        format!(
            "GonalityCertificate(value={}, exhausted_degree={}, subdivision={})",
            self.value, self.exhausted_degree, self.subdivision
        )
    }
}

/// A morphism of metric graphs with integer dilation factors.
#[pyclass(name = "GraphMorphism", skip_from_py_object)]
#[derive(Clone)]
struct PyMorphism {
    inner: GraphMorphism,
}

#[pymethods]
impl PyMorphism {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMorphism {
            inner: json::morphism_from_json(text).map_err(value_err)?,
        })
    }

    /// The degree d-3 harmonic morphism from the sharp graph to a tree.
    #[staticmethod]
    fn build_sharp(d: u32, k1: u32) -> PyResult<Self> {
        Ok(PyMorphism {
            inner: build_sharp_morphism(d, k1).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        json::morphism_to_json(&self.inner)
    }

    fn is_finite(&self) -> bool {
        self.inner.is_finite()
    }

    /// `(harmonic, global_degree, local_degrees, defects)`.
    fn check(&self) -> PyResult<HarmonicSummary> {
        let report = self.inner.check_harmonic().map_err(value_err)?;
        Ok((
            report.harmonic,
            report.global_degree,
            report.local_degrees,
            report.defects.iter().map(|d| d.to_string()).collect(),
        ))
    }

    /// Extends to a finite harmonic morphism by tropical modifications.
    fn make_finite(&self) -> PyResult<Self> {
        Ok(PyMorphism {
            inner: make_finite(&self.inner).map_err(value_err)?,
        })
    }

    fn ramification_divisor(&self) -> PyResult<PyDivisor> {
        Ok(PyDivisor {
            inner: gonlab_core::ramification_divisor(&self.inner).map_err(value_err)?,
        })
    }

    fn is_effective(&self) -> PyResult<bool> {
        is_effective_morphism(&self.inner).map_err(value_err)
    }

    /// `(verdict, reason)`: verdict is true when every directional
    /// derivative equals 1 (the sufficient lifting condition).
    fn liftable(&self) -> PyResult<(bool, String)> {
        let cert = liftability_certificate(&self.inner).map_err(value_err)?;
        Ok((cert.verdict, cert.reason))
    }

    /// The fiber divisor over a target point (finite morphisms only).
    fn fiber(&self, at: &str) -> PyResult<PyDivisor> {
        Ok(PyDivisor {
            inner: fiber_divisor(&self.inner, &parse_point(at)?).map_err(value_err)?,
        })
    }

    fn source(&self) -> PyMetricGraph {
        PyMetricGraph {
            inner: self.inner.source.clone(),
        }
    }

    fn target(&self) -> PyMetricGraph {
        PyMetricGraph {
            inner: self.inner.target.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "GraphMorphism({} -> {} vertices, finite={})",
            self.inner.source.vertex_count(),
            self.inner.target.vertex_count(),
            self.is_finite()
        )
    }
}

#[pymodule]
fn gonlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricGraph>()?;
    m.add_class::<PyDivisor>()?;
    m.add_class::<PyGonality>()?;
    m.add_class::<PyMorphism>()?;
    Ok(())
}
