//! Finite-sum convex optimization through component gradient-and-prox
//! oracles.
//!
//! The library provides:
//!
//! - the oracle model itself ([`oracle`]): problems F(x) = (1/m) Σ f_i(x),
//!   the h_F query triple (value, subgradient, prox), and query ledgers
//!   that measure oracle complexity;
//! - Moreau-envelope smoothing of Lipschitz components ([`smoothing`]);
//! - upper-bound solvers ([`solvers`]): projected GD/AGD, SGD, SVRG,
//!   Catalyst-style acceleration, the regularization reduction, and the
//!   smoothing pipelines;
//! - a deterministic resisting oracle ([`resisting`]) that builds a hard
//!   instance online against any deterministic solver, certifying a
//!   suboptimality floor until enough rounds of queries have been spent;
//! - static randomized-hard instance families ([`instances`]) with
//!   span-property checks and exact proxes.
//!
//! See the book under `book/` for a guided tour; its code examples are
//! compiled and run as doc-tests from [`guide`].

pub mod brute;
pub mod components;
pub mod error;
pub mod guide;
pub mod instances;
mod linalg;
pub mod oracle;
pub mod resisting;
pub mod rng;
pub mod smoothing;
pub mod solvers;
pub mod tol;
pub mod vector;

pub use error::{Error, Result};
pub use oracle::{
    check_prox_optimality, project_ball, query, ComponentOracle, FunctionClass, OracleResponse,
    OracleSource, Problem, ProblemSource, QueryLedger,
};
pub use vector::Vector;
