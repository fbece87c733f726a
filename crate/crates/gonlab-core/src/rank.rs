//! Baker–Norine rank, Riemann–Roch checking, and gonality search.
//!
//! Rank is computed by exhausting effective divisors `E` supported on a
//! rank-determining set (by default the full vertex set of the subdivided
//! lattice model): `rank(D) >= r` iff `|D - E|` is nonempty for every such
//! `E` of degree `r`. The implementation runs the equivalent recursion
//! `rank(D) = 1 + min_q rank(D - (q))`, memoized on q-reduced forms so each
//! divisor class is visited once.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use thiserror::Error;

use crate::divisor::{canonical_divisor, Divisor, DivisorError};
use crate::graph::{GraphError, MetricGraph, PointRef};
use crate::lattice::{required_subdivision, LatticeError, LatticeModel};
use crate::reduction::reduce_vec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("enumeration budget exceeded after {calls} reductions (cap {cap})")]
    BudgetExceeded { calls: u64, cap: u64 },
    #[error("enumeration support must contain the essential vertex `{vertex}`")]
    SupportMissingEssentialVertex { vertex: String },
    #[error("enumeration support is empty")]
    EmptySupport,
    #[error("no divisor of rank >= 1 found up to degree {max_degree}")]
    GonalityNotFound { max_degree: u32 },
}

impl From<DivisorError> for RankError {
    fn from(e: DivisorError) -> Self {
        match e {
            DivisorError::Graph(g) => RankError::Graph(g),
        }
    }
}

/// Options for rank computations.
#[derive(Debug, Clone)]
pub struct RankOptions {
    /// Lattice subdivision; `None` picks the least level hosting all inputs.
    pub subdivision: Option<u32>,
    /// Enumeration support; `None` uses every lattice node. A custom support
    /// must contain all essential vertices (it is then a vertex set, hence
    /// rank-determining).
    pub support: Option<Vec<PointRef>>,
    /// Budget cap on q-reductions performed by one rank call.
    pub max_reductions: u64,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            subdivision: None,
            support: None,
            max_reductions: 50_000_000,
        }
    }
}

impl RankOptions {
    pub fn with_subdivision(s: u32) -> Self {
        RankOptions {
            subdivision: Some(s),
            ..Default::default()
        }
    }
}

struct RankCtx<'a> {
    model: &'a LatticeModel,
    support: &'a [usize],
    q0: usize,
    memo: HashMap<Vec<i64>, i64>,
    calls: u64,
    cap: u64,
}

impl RankCtx<'_> {
    fn reduce(&mut self, chips: Vec<i64>) -> Result<Vec<i64>, RankError> {
        self.calls += 1;
        if self.calls > self.cap {
            return Err(RankError::BudgetExceeded {
                calls: self.calls,
                cap: self.cap,
            });
        }
        Ok(reduce_vec(self.model, chips, self.q0))
    }

    fn rank_of(&mut self, chips: Vec<i64>) -> Result<i64, RankError> {
        let reduced = self.reduce(chips)?;
        if let Some(r) = self.memo.get(&reduced) {
            return Ok(*r);
        }
        if reduced[self.q0] < 0 {
            self.memo.insert(reduced, -1);
            return Ok(-1);
        }
        let mut worst = i64::MAX;
        for &s in self.support {
            let mut next = reduced.clone();
            next[s] -= 1;
            worst = worst.min(self.rank_of(next)?);
            if worst == -1 {
                break;
            }
        }
        debug_assert!(worst < i64::MAX, "support is nonempty");
        let r = worst + 1;
        self.memo.insert(reduced, r);
        Ok(r)
    }
}

fn build_model(
    g: &MetricGraph,
    divisors: &[&Divisor],
    opts_subdivision: Option<u32>,
) -> Result<LatticeModel, RankError> {
    let s = match opts_subdivision {
        Some(s) => s,
        None => {
            let pts: Vec<&PointRef> = divisors.iter().flat_map(|d| d.support()).collect();
            required_subdivision(g, pts)?
        }
    };
    Ok(LatticeModel::new(g, s)?)
}

fn support_nodes(model: &LatticeModel, opts: &RankOptions) -> Result<Vec<usize>, RankError> {
    match &opts.support {
        None => Ok((0..model.node_count()).collect()),
        Some(points) => {
            if points.is_empty() {
                return Err(RankError::EmptySupport);
            }
            let mut nodes = Vec::with_capacity(points.len());
            for p in points {
                nodes.push(model.node_of_point(p)?);
            }
            let node_set: HashSet<usize> = nodes.iter().copied().collect();
            let g = model.graph();
            for v in g.graph_essential_vertices() {
                let n = model.node_of_point(&PointRef::vertex(&v))?;
                if !node_set.contains(&n) {
                    return Err(RankError::SupportMissingEssentialVertex { vertex: v });
                }
            }
            let mut nodes: Vec<usize> = node_set.into_iter().collect();
            nodes.sort_unstable();
            Ok(nodes)
        }
    }
}

/// True iff `|D|` is nonempty: the q-reduced form is effective.
pub fn has_effective_rep(
    g: &MetricGraph,
    d: &Divisor,
    opts: &RankOptions,
) -> Result<bool, RankError> {
    d.validate_on(g)?;
    if d.degree() < 0 {
        return Ok(false);
    }
    let model = build_model(g, &[d], opts.subdivision)?;
    let q0 = 0;
    let chips = model.divisor_to_vec(d)?;
    let reduced = reduce_vec(&model, chips, q0);
    Ok(reduced[q0] >= 0)
}

/// The Baker–Norine rank of `d` (-1 when `|d|` is empty).
pub fn rank(g: &MetricGraph, d: &Divisor, opts: &RankOptions) -> Result<i64, RankError> {
    d.validate_on(g)?;
    let model = build_model(g, &[d], opts.subdivision)?;
    let support = support_nodes(&model, opts)?;
    let mut ctx = RankCtx {
        model: &model,
        support: &support,
        q0: 0,
        memo: HashMap::new(),
        calls: 0,
        cap: opts.max_reductions,
    };
    let chips = model.divisor_to_vec(d)?;
    ctx.rank_of(chips)
}

/// `rank(D) - rank(K - D) - deg(D) - 1 + g`; the Riemann–Roch theorem says
/// this is identically zero.
pub fn riemann_roch_residual(
    g: &MetricGraph,
    d: &Divisor,
    opts: &RankOptions,
) -> Result<i64, RankError> {
    let k = canonical_divisor(g)?;
    let genus = g.genus()? as i64;
    let r_d = rank(g, d, opts)?;
    let r_kd = rank(g, &(&k - d), opts)?;
    Ok(r_d - r_kd - d.degree() - 1 + genus)
}

/// Exhaustion record attached to a gonality certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExhaustionRecord {
    pub subdivision: u32,
    /// The degree that was exhausted (one less than the gonality value).
    pub degree: u32,
    /// True when every lattice-supported effective divisor of that degree
    /// was tested and none had rank >= 1.
    pub exhausted: bool,
}

/// Result of a gonality search: the smallest degree of a lattice-supported
/// divisor of rank >= 1, a witness of that degree, and the exhaustion
/// record for the previous degree.
///
/// The lattice search certifies an upper bound for the metric gonality;
/// the exhaustion record documents the consistency check at the chosen
/// subdivision level, not a metric lower-bound proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GonalityCertificate {
    pub value: u32,
    pub witness: Divisor,
    pub exhaustion: ExhaustionRecord,
}

/// Options for the gonality search.
#[derive(Debug, Clone)]
pub struct GonalityOptions {
    pub subdivision: u32,
    /// Largest degree to try; default is the Brill–Noether bound
    /// `floor((g + 3) / 2)`.
    pub max_degree: Option<u32>,
    /// Worker threads for the candidate enumeration. The result does not
    /// depend on this value.
    pub jobs: usize,
    pub max_reductions: u64,
}

impl Default for GonalityOptions {
    fn default() -> Self {
        GonalityOptions {
            subdivision: 1,
            max_degree: None,
            jobs: 1,
            max_reductions: 200_000_000,
        }
    }
}

impl GonalityOptions {
    pub fn with_subdivision(s: u32) -> Self {
        GonalityOptions {
            subdivision: s,
            ..Default::default()
        }
    }
}

/// Searches degrees 1, 2, ... in order and returns the first degree with a
/// rank >= 1 lattice-supported divisor, together with the lexicographically
/// least witness at that degree.
pub fn gonality_search(
    g: &MetricGraph,
    opts: &GonalityOptions,
) -> Result<GonalityCertificate, RankError> {
    let model = LatticeModel::new(g, opts.subdivision)?;
    let genus = model.genus() as u32;
    let cap = opts.max_degree.unwrap_or((genus + 3) / 2).max(1);
    let budget = AtomicU64::new(0);
    for degree in 1..=cap {
        if let Some(witness) =
            search_degree(&model, degree, opts.jobs.max(1), &budget, opts.max_reductions)?
        {
            return Ok(GonalityCertificate {
                value: degree,
                witness,
                exhaustion: ExhaustionRecord {
                    subdivision: opts.subdivision,
                    degree: degree - 1,
                    exhausted: true,
                },
            });
        }
    }
    Err(RankError::GonalityNotFound { max_degree: cap })
}

/// Exhaustively tests every effective lattice-supported divisor of the
/// given degree; returns the lexicographically least one of rank >= 1, or
/// `None` when the degree is exhausted without a hit.
pub fn search_degree_for_rank_one(
    g: &MetricGraph,
    degree: u32,
    subdivision: u32,
    jobs: usize,
) -> Result<Option<Divisor>, RankError> {
    let model = LatticeModel::new(g, subdivision)?;
    let budget = AtomicU64::new(0);
    search_degree(&model, degree, jobs.max(1), &budget, u64::MAX)
}

/// A found candidate: its global enumeration index plus the node multiset.
type SearchHit = Option<(usize, Vec<u32>)>;

fn search_degree(
    model: &LatticeModel,
    degree: u32,
    jobs: usize,
    budget: &AtomicU64,
    cap: u64,
) -> Result<Option<Divisor>, RankError> {
    if degree == 0 {
        return Ok(None);
    }
    let candidates = multisets(model.node_count(), degree as usize);
    let total = candidates.len();
    let chunk = total.div_ceil(jobs);
    // index of the best (least) hit so far, for cross-worker pruning only;
    // every worker scans its chunk in order so the merged minimum is the
    // global lexicographic minimum regardless of scheduling
    let best = AtomicUsize::new(usize::MAX);

    let scan = |range: std::ops::Range<usize>| -> Result<SearchHit, RankError> {
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        for idx in range {
            if idx >= best.load(Ordering::Relaxed) {
                return Ok(None);
            }
            let cand = &candidates[idx];
            let mut chips = vec![0i64; model.node_count()];
            for &n in cand {
                chips[n as usize] += 1;
            }
            let spent = budget.fetch_add(1, Ordering::Relaxed);
            if spent >= cap {
                return Err(RankError::BudgetExceeded {
                    calls: spent,
                    cap,
                });
            }
            let canonical = reduce_vec(model, chips, 0);
            if !seen.insert(canonical.clone()) {
                continue;
            }
            if has_rank_at_least_one(model, &canonical, budget, cap)? {
                best.fetch_min(idx, Ordering::Relaxed);
                return Ok(Some((idx, cand.clone())));
            }
        }
        Ok(None)
    };

    let mut hits: Vec<(usize, Vec<u32>)> = Vec::new();
    if jobs <= 1 || total < 2 * jobs {
        if let Some(hit) = scan(0..total)? {
            hits.push(hit);
        }
    } else {
        let results: Vec<Result<SearchHit, RankError>> =
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for w in 0..jobs {
                    let lo = w * chunk;
                    let hi = ((w + 1) * chunk).min(total);
                    if lo >= hi {
                        break;
                    }
                    let scan = &scan;
                    handles.push(scope.spawn(move || scan(lo..hi)));
                }
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .collect()
            });
        for r in results {
            if let Some(hit) = r? {
                hits.push(hit);
            }
        }
    }
    Ok(hits.into_iter().min_by_key(|(idx, _)| *idx).map(|(_, cand)| {
        let mut chips = vec![0i64; model.node_count()];
        for &n in &cand {
            chips[n as usize] += 1;
        }
        model.vec_to_divisor(&chips)
    }))
}

/// `rank >= 1` test against the full lattice node set: `|D - (q)|` must be
/// nonempty for every node `q`.
fn has_rank_at_least_one(
    model: &LatticeModel,
    chips: &[i64],
    budget: &AtomicU64,
    cap: u64,
) -> Result<bool, RankError> {
    for q in 0..model.node_count() {
        let mut probe = chips.to_vec();
        probe[q] -= 1;
        let spent = budget.fetch_add(1, Ordering::Relaxed);
        if spent >= cap {
            return Err(RankError::BudgetExceeded { calls: spent, cap });
        }
        let reduced = reduce_vec(model, probe, 0);
        if reduced[0] < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All weakly increasing index sequences of the given length over
/// `0..nodes`, in lexicographic order.
fn multisets(nodes: usize, degree: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if nodes == 0 {
        return out;
    }
    let mut cur = vec![0u32; degree];
    loop {
        out.push(cur.clone());
        // advance to the next weakly increasing sequence
        let mut i = degree;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if (cur[i] as usize) < nodes - 1 {
                cur[i] += 1;
                let v = cur[i];
                for item in cur.iter_mut().skip(i + 1) {
                    *item = v;
                }
                break;
            }
        }
    }
}

impl MetricGraph {
    /// The essential vertices: those of valence different from 2.
    pub(crate) fn graph_essential_vertices(&self) -> Vec<String> {
        self.vertex_ids()
            .filter(|v| self.vertex_valence(v).map(|k| k != 2).unwrap_or(false))
            .map(|v| v.to_string())
            .collect()
    }
}
