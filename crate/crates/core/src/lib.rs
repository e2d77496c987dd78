//! Synthetic plane-geometry data engine.
//!
//! Problems are written in a small clause language ([`lang`]), sampled and
//! solved into coordinate diagrams ([`synth`]), turned into premises and
//! captions ([`premises`]), drawn ([`render`]) and packaged into
//! classification benchmarks ([`benchmark`]).

pub mod benchmark;
pub mod detect;
pub mod geom;
pub mod lang;
pub mod pairs;
pub mod premises;
pub mod render;
pub mod seed;
pub mod synth;

pub use lang::{
    parse_problem, serialize_problem, Clause, Constraint, ParseError, PointId, Problem,
    RelationKind,
};
pub use synth::{
    check_nondegenerate, sample_problem, solve_diagram, Diagram, SamplerConfig, SolveError,
};
