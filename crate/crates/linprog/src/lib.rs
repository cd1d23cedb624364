//! Linear and integer programming for desk-scale routing models.
//!
//! The crate is self-contained: a bounded-variable revised primal simplex on a
//! sparse LU factorisation, a best-first branch-and-bound driver on top of it,
//! a brute-force total-unimodularity checker and a fixed-format MPS writer.
//!
//! All solvers are deterministic: the same program always produces the same
//! pivot sequence and the same solution.

mod bnb;
mod lu;
mod model;
mod mps;
mod simplex;
pub mod tu;

pub use bnb::{solve_ilp, IlpOptions};
pub use model::{Constraint, LinearProgram, LpError, LpSolution, Relation, Status, VarId};
pub use mps::to_mps;
pub use simplex::{solve_lp, solve_lp_with, SimplexOptions};
pub use tu::{check_totally_unimodular, TuOptions, TuVerdict};

/// Primal feasibility tolerance for rows and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Distance from the nearest integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Relative tolerance used when comparing objective values.
pub const OBJECTIVE_REL_TOL: f64 = 1e-9;
