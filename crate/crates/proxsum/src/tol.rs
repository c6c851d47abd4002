//! Centralized tolerance constants. Every numerical slack used by the
//! library and its verification suites lives here.

/// Orthonormality of adversary / instance basis vectors.
pub const ORTHONORMALITY: f64 = 1e-10;

/// Residual of the prox optimality condition 0 ∈ ∂f(u) + β(u−x) + N_X(u).
pub const PROX_RESIDUAL: f64 = 1e-9;

/// Slack allowed when checking the subgradient inequality
/// f(y) ≥ f(x) + ⟨g, y−x⟩ − SUBGRADIENT_SLACK.
pub const SUBGRADIENT_SLACK: f64 = 1e-9;

/// Agreement required between a structured prox solve and the
/// brute-force inner solver.
pub const PROX_BRUTE_AGREEMENT: f64 = 1e-8;

/// Forbidden-direction leakage allowed in span-property checks.
pub const SPAN_LEAK: f64 = 1e-12;

/// Residual below which a fresh orthogonal direction cannot be extracted.
pub const DIMENSION_EXHAUSTED: f64 = 1e-8;
