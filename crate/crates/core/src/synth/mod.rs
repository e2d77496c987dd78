//! Problem sampling and coordinate realization.

mod degeneracy;
mod diagram;
pub mod relations;
mod sampler;
mod solver;

pub use degeneracy::{
    check_nondegenerate, circle_sets, line_sets, COLLINEAR_SLACK_DEG, CONCYCLIC_SLACK,
    MIN_POINT_DISTANCE,
};
pub use diagram::{constraint_residual, CircleCenter, CircleElem, Diagram, RecordEntry};
pub use sampler::{
    sample_length, sample_problem, AngleGrid, ProblemBuilder, SamplerConfig, MAX_CLAUSES,
};
pub use solver::{solve_diagram, SolveError, FRAME_EXTENT, MAX_ATTEMPTS, RESIDUAL_TOL};
