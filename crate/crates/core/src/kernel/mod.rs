//! Convex solvers shared by the multi-user algorithms.

pub mod barrier;
pub mod waterfill;

pub use barrier::{
    barrier_solve, phase_one, BarrierOptions, BarrierSolution, ConcaveProgram, LinearConstraint, LogConstraint, LogTerm,
};
pub use waterfill::{waterfill_min_sum, LogSumProblem, WaterfillSolution};
