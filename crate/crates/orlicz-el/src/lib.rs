//! Numerical Orlicz-space calculus and a direct-method solver for periodic
//! Euler-Lagrange systems whose lagrangians grow faster than any power.
//!
//! The crate is organized around six pieces:
//!
//! - [`nfunction`]: N-functions as computable objects (evaluation, derivative,
//!   Young conjugate, Matuszewska-Orlicz indices, doubling-condition scans,
//!   domination orders between growth functions).
//! - [`construct`]: the two explicit constructions used by the coercivity
//!   machinery: a doubling regularization of a derivative near zero and a
//!   submultiplicative power minorant fitted from the indices.
//! - [`orlicz`]: discretized Orlicz-space calculus on a periodic grid --
//!   modulars, Luxemburg and Amemiya norms, the mean/oscillation split,
//!   and the classical inequality suite (Young, Hoelder, Sobolev, Wirtinger).
//! - [`hypotheses`]: probe-based checkers for the structure and coercivity
//!   conditions a problem instance must satisfy, plus the diagnostic
//!   functionals used in the lower-bound analysis.
//! - [`solver`]: minimization of the discrete action integral over periodic
//!   piecewise-linear trajectories, with Euler-Lagrange residual and
//!   boundary verification.
//! - [`registry`]: named lagrangian families used by the CLI and tests.
//!
//! All condition verdicts produced by this crate are finite-probe heuristics:
//! the underlying conditions are asymptotic and cannot be decided from finitely
//! many samples. Reports therefore always carry the probe ranges they used.

pub mod construct;
pub mod hypotheses;
pub mod nfunction;
pub mod orlicz;
pub mod probe;
pub mod problem;
pub mod registry;
pub mod solver;
pub mod sweeps;

pub use nfunction::NFunction;
pub use orlicz::GridFunction;
pub use problem::{Lagrangian, Potential, ProblemSpec};
pub use solver::SolveResult;
