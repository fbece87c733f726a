//! Divisor theory on metric graphs at desk scale: exact chip-firing,
//! q-reduced divisors via the burning algorithm, Baker–Norine rank,
//! gonality search with certificates, generators for complete graphs with
//! removed edge configurations, and harmonic morphisms with tropical
//! modifications.
//!
//! All metric data is exact (rational lengths and offsets); every
//! computation runs on an integer lattice model, so results are
//! bit-reproducible. Values are immutable and operations are pure
//! functions, safe to run from many threads.

pub mod divisor;
pub mod dot;
pub mod families;
pub mod function;
pub mod graph;
pub mod harmonic;
pub mod json;
pub mod lattice;
pub mod rank;
pub mod rational;
pub mod reduction;
pub mod rng;
pub mod verify;

pub use divisor::{canonical_divisor, Divisor};
pub use function::{principal_divisor, FiringSet, RationalFunction};
pub use graph::{EdgeLength, MetricGraph, PointRef, TangentDirection};
pub use harmonic::{
    build_sharp_morphism, compose, elementary_modification, fiber_divisor, is_effective_morphism,
    liftability_certificate, make_finite, ramification_divisor, GraphMorphism,
};
pub use lattice::LatticeModel;
pub use rank::{
    gonality_search, has_effective_rep, rank, riemann_roch_residual, GonalityCertificate,
    GonalityOptions, RankOptions,
};
pub use rational::Rat;
pub use reduction::{burn, is_reduced, linearly_equivalent, reduce, BurnReport, ReduceOptions};
