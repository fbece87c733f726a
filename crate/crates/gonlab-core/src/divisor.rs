//! Divisors: finite formal integer combinations of points of a metric graph.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

use crate::graph::{GraphError, MetricGraph, PointRef};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivisorError {
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A divisor, stored as a map from points to nonzero coefficients.
///
/// The zero divisor has an empty support. Coefficients of unlisted points
/// are zero.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Divisor {
    coeffs: BTreeMap<PointRef, i64>,
}

impl Divisor {
    pub fn zero() -> Self {
        Divisor::default()
    }

    pub fn new<I: IntoIterator<Item = (PointRef, i64)>>(entries: I) -> Self {
        let mut d = Divisor::zero();
        for (p, c) in entries {
            d.add_coeff(p, c);
        }
        d
    }

    /// One chip on each of the given points.
    pub fn ones<I: IntoIterator<Item = PointRef>>(points: I) -> Self {
        Divisor::new(points.into_iter().map(|p| (p, 1)))
    }

    pub fn single(p: PointRef, c: i64) -> Self {
        Divisor::new([(p, c)])
    }

    pub fn add_coeff(&mut self, p: PointRef, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.coeffs.entry(p.clone()).or_insert(0);
        *entry += c;
        if *entry == 0 {
            self.coeffs.remove(&p);
        }
    }

    pub fn coeff(&self, p: &PointRef) -> i64 {
        self.coeffs.get(p).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> i64 {
        self.coeffs.values().sum()
    }

    /// Sum of the positive coefficients.
    pub fn positive_degree(&self) -> i64 {
        self.coeffs.values().filter(|c| **c > 0).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_effective(&self) -> bool {
        self.coeffs.values().all(|c| *c >= 0)
    }

    /// Effective on the complement of `q` (the coefficient at `q` itself may
    /// be arbitrary).
    pub fn is_effective_away_from(&self, q: &PointRef) -> bool {
        self.coeffs.iter().all(|(p, c)| *c >= 0 || p == q)
    }

    pub fn support(&self) -> impl Iterator<Item = &PointRef> {
        self.coeffs.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PointRef, i64)> {
        self.coeffs.iter().map(|(p, c)| (p, *c))
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    /// Checks that every support point lies on `g`. Interior support points
    /// must sit strictly inside finite edges.
    pub fn validate_on(&self, g: &MetricGraph) -> Result<(), DivisorError> {
        for p in self.support() {
            g.check_point(p)?;
        }
        Ok(())
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (p, c) in &self.coeffs {
            if first {
                if *c == 1 {
                    write!(f, "{p}")?;
                } else {
                    write!(f, "{c}{p}")?;
                }
                first = false;
            } else if *c == 1 {
                write!(f, " + {p}")?;
            } else if *c == -1 {
                write!(f, " - {p}")?;
            } else if *c < 0 {
                write!(f, " - {}{p}", -c)?;
            } else {
                write!(f, " + {c}{p}")?;
            }
        }
        Ok(())
    }
}

impl Add for &Divisor {
    type Output = Divisor;
    fn add(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_coeff(p.clone(), c);
        }
        out
    }
}

impl Sub for &Divisor {
    type Output = Divisor;
    fn sub(self, rhs: &Divisor) -> Divisor {
        let mut out = self.clone();
        for (p, c) in rhs.iter() {
            out.add_coeff(p.clone(), -c);
        }
        out
    }
}

impl Neg for &Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        Divisor::new(self.iter().map(|(p, c)| (p.clone(), -c)))
    }
}

/// The canonical divisor `K = sum (val(p) - 2)(p)` over the vertices.
///
/// 2-valent points contribute zero and are omitted; the degree is always
/// `2g - 2`.
pub fn canonical_divisor(g: &MetricGraph) -> Result<Divisor, DivisorError> {
    g.ensure_valid()?;
    g.ensure_finite()?;
    let mut d = Divisor::zero();
    for v in g.vertex_ids() {
        let val = g.vertex_valence(v)? as i64;
        d.add_coeff(PointRef::vertex(v), val - 2);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_bipartite_graph, complete_graph, EdgeLength, MetricGraph};
    use crate::rational::{rat, Rat};

    #[test]
    fn normalization_drops_zeros_and_merges() {
        let p = PointRef::vertex("a");
        let d = Divisor::new([(p.clone(), 2), (p.clone(), -2)]);
        assert!(d.is_zero());
        let d = Divisor::new([(p.clone(), 2), (p.clone(), 1)]);
        assert_eq!(d.coeff(&p), 3);
        assert_eq!(d.degree(), 3);
    }

    #[test]
    fn canonical_divisor_k4() {
        let g = complete_graph(4);
        let k = canonical_divisor(&g).unwrap();
        assert_eq!(k.degree(), 4); // 2g - 2 = 2*3 - 2
        for v in ["v1", "v2", "v3", "v4"] {
            assert_eq!(k.coeff(&PointRef::vertex(v)), 1);
        }
    }

    #[test]
    fn canonical_divisor_single_edge() {
        let g = MetricGraph::new(
            vec!["u".into(), "v".into()],
            vec![(
                "e".to_string(),
                "u".to_string(),
                "v".to_string(),
                EdgeLength::Finite(Rat::from_integer(1)),
            )],
        )
        .unwrap();
        let k = canonical_divisor(&g).unwrap();
        assert_eq!(k.degree(), -2);
        assert_eq!(k.coeff(&PointRef::vertex("u")), -1);
        assert_eq!(k.coeff(&PointRef::vertex("v")), -1);
    }

    #[test]
    fn canonical_divisor_k33() {
        let g = complete_bipartite_graph(3, 3);
        let k = canonical_divisor(&g).unwrap();
        assert_eq!(k.degree(), 6); // 2*4 - 2
        assert!(k.iter().all(|(_, c)| c == 1));
        assert_eq!(k.support_size(), 6);
    }

    #[test]
    fn canonical_degree_matches_genus() {
        for d in 3..=6 {
            let g = complete_graph(d);
            let k = canonical_divisor(&g).unwrap();
            assert_eq!(k.degree(), 2 * g.genus().unwrap() as i64 - 2);
        }
    }

    #[test]
    fn canonical_divisor_requires_finite_lengths() {
        let g = MetricGraph::new(
            vec!["a".into(), "b".into(), "z".into()],
            vec![
                ("e".to_string(), "a".to_string(), "b".to_string(), EdgeLength::Finite(rat(1, 1))),
                ("leaf".to_string(), "b".to_string(), "z".to_string(), EdgeLength::Infinite),
            ],
        )
        .unwrap();
        assert!(canonical_divisor(&g).is_err());
    }

    #[test]
    fn validate_on_rejects_bad_points() {
        let g = complete_graph(3);
        let bad = Divisor::single(PointRef::vertex("zz"), 1);
        assert!(bad.validate_on(&g).is_err());
        let bad = Divisor::single(PointRef::interior("v1-v2", rat(3, 2)), 1);
        assert!(bad.validate_on(&g).is_err());
        let ok = Divisor::single(PointRef::interior("v1-v2", rat(1, 2)), 1);
        assert!(ok.validate_on(&g).is_ok());
    }
}
