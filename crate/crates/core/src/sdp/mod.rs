//! Dense Hermitian semidefinite programming.

pub mod dump;
mod problem;
mod realify;
mod residual;
mod solver;

pub use problem::{BlockId, BlockSpec, Constraint, ObjectiveSense, Relation, ScalarId, SdpProblem, Term};
pub use realify::{realify, RealBlockKind, RealRow, RealifiedProblem, SymCoef};
pub use residual::{check_residuals, ResidualReport};
pub use solver::{solve, SdpSolution, SdpStatus, SolverOptions};
