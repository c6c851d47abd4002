//! The component gradient-and-prox oracle model.
//!
//! A problem is an average F(x) = (1/m) Σ f_i(x) of convex components over
//! a domain X, either all of ℝ^d or the ball {‖x‖ ≤ B}. Algorithms access
//! the components only through [`query`], which returns the triple
//! (f_i(x), g ∈ ∂f_i(x), prox_{f_i}(x, β)) and appends one record to a
//! [`QueryLedger`]. Oracle complexity is the ledger total.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
#[cfg(test)]
use crate::tol;
use crate::vector::Vector;

/// Structural metadata of a problem: Lipschitz constant, smoothness,
/// strong convexity, and domain radius. Absent fields mean the property
/// is not certified, not that it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionClass {
    pub lipschitz_l: Option<f64>,
    pub smooth_gamma: Option<f64>,
    pub strong_lambda: f64,
    pub radius_b: Option<f64>,
}

impl FunctionClass {
    pub fn lipschitz(l: f64, b: Option<f64>) -> Self {
        FunctionClass {
            lipschitz_l: Some(l),
            smooth_gamma: None,
            strong_lambda: 0.0,
            radius_b: b,
        }
    }

    pub fn smooth(gamma: f64, b: Option<f64>) -> Self {
        FunctionClass {
            lipschitz_l: None,
            smooth_gamma: Some(gamma),
            strong_lambda: 0.0,
            radius_b: b,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.strong_lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lipschitz_l.is_none() && self.smooth_gamma.is_none() {
            return Err(Error::InvalidClass(
                "at least one of lipschitz_l / smooth_gamma must be present".into(),
            ));
        }
        for (name, v) in [
            ("lipschitz_l", self.lipschitz_l),
            ("smooth_gamma", self.smooth_gamma),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidClass(format!("{name} must be nonnegative")));
                }
            }
        }
        if !(self.strong_lambda >= 0.0 && self.strong_lambda.is_finite()) {
            return Err(Error::InvalidClass("strong_lambda must be nonnegative".into()));
        }
        if let Some(b) = self.radius_b {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidClass("radius_b must be positive".into()));
            }
        }
        if self.strong_lambda > 0.0 {
            if let Some(g) = self.smooth_gamma {
                if g < self.strong_lambda {
                    return Err(Error::InvalidClass(
                        "smooth_gamma must be at least strong_lambda".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One oracle answer: the h_F triple.
#[derive(Debug, Clone)]
pub struct OracleResponse {
    pub value: f64,
    /// A subgradient when the component is non-smooth.
    pub gradient: Vector,
    pub prox_point: Vector,
}

/// Subdifferential of a component at a point, in box form:
/// ∂f(u) = { fixed + Σ_j α_j dir_j : lo_j ≤ α_j ≤ hi_j }.
///
/// Components with kinks override [`ComponentOracle::subgradient_box`] so
/// the prox optimality check can measure the distance from zero to the
/// whole subdifferential rather than to one arbitrary selection.
#[derive(Debug, Clone)]
pub struct SubgradientBox {
    pub fixed: Vector,
    pub dirs: Vec<Vector>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SubgradientBox {
    pub fn singleton(g: Vector) -> Self {
        SubgradientBox {
            fixed: g,
            dirs: vec![],
            lo: vec![],
            hi: vec![],
        }
    }
}

/// A single convex component f_i. `prox_free` is the unconstrained prox;
/// the domain constraint is applied generically by [`ball_prox`].
pub trait ComponentOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    /// Subgradient selection. At kinks the choice follows the component's
    /// documented rule (constructions use sign(0) = 0).
    fn subgradient(&self, x: &Vector) -> Vector;

    /// argmin_u f(u) + (beta/2)‖x − u‖² over all of ℝ^d.
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector;

    /// Full subdifferential at u when the component can describe it;
    /// `None` means the singleton {subgradient(u)}.
    fn subgradient_box(&self, _u: &Vector) -> Option<SubgradientBox> {
        None
    }

    /// Exact-minimizer hook for test functions: (argmin over ℝ^d, min value).
    fn minimizer(&self) -> Option<(Vector, f64)> {
        None
    }
}

/// Projection onto {‖x‖ ≤ B}; identity when `radius` is absent.
pub fn project_ball(x: &Vector, radius: Option<f64>) -> Vector {
    match radius {
        None => x.clone(),
        Some(b) => {
            let n = x.norm();
            if n <= b {
                x.clone()
            } else {
                x.scale(b / n)
            }
        }
    }
}

/// Domain-constrained prox. Uses the Lagrangian identity
/// argmin_{‖u‖≤B} f(u) + (β/2)‖x−u‖² = prox_f(βx/(β+μ), β+μ) for the
/// multiplier μ ≥ 0 with complementary slackness, found by bisection on
/// the monotone map μ ↦ ‖prox_f(βx/(β+μ), β+μ)‖.
pub fn ball_prox(comp: &dyn ComponentOracle, x: &Vector, beta: f64, radius: Option<f64>) -> Vector {
    let free = comp.prox_free(x, beta);
    let b = match radius {
        None => return free,
        Some(b) => b,
    };
    if free.norm() <= b {
        return free;
    }
    let at = |mu: f64| -> Vector { comp.prox_free(&x.scale(beta / (beta + mu)), beta + mu) };
    let mut lo = 0.0;
    let mut hi = beta.max(1.0);
    while at(hi).norm() > b {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).norm() > b {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    at(hi)
}

/// Residual of the prox optimality condition:
/// dist(0, ∂f(u) + β(u − x) + N_X(u)), using the component's
/// subdifferential description (selection only, if no box is provided).
pub fn check_prox_optimality(
    comp: &dyn ComponentOracle,
    x: &Vector,
    beta: f64,
    u: &Vector,
    radius: Option<f64>,
) -> f64 {
    prox_residual_vector(comp, x, beta, u, radius).0
}

/// As [`check_prox_optimality`], but also returns the minimal-norm
/// element itself (the direction in which u fails optimality).
pub fn prox_residual_vector(
    comp: &dyn ComponentOracle,
    x: &Vector,
    beta: f64,
    u: &Vector,
    radius: Option<f64>,
) -> (f64, Vector) {
    let sbox = comp
        .subgradient_box(u)
        .unwrap_or_else(|| SubgradientBox::singleton(comp.subgradient(u)));
    // r(α, c) = fixed + Σ α_j dir_j + β(u − x) + c·u, α in box, c ≥ 0
    // (the normal-cone ray only when u sits on the ball boundary).
    let mut base = sbox.fixed.clone();
    base.axpy(beta, &u.sub(x));
    let mut dirs = sbox.dirs.clone();
    let mut lo = sbox.lo.clone();
    let mut hi = sbox.hi.clone();
    if let Some(b) = radius {
        if u.norm() >= b * (1.0 - 1e-9) && u.norm() > 0.0 {
            dirs.push(u.clone());
            lo.push(0.0);
            hi.push(f64::INFINITY);
        }
    }
    if dirs.is_empty() {
        return (base.norm(), base);
    }
    // Projected gradient on the box-constrained least squares
    // min_α ‖base + D α‖².
    let p = dirs.len();
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    for i in 0..p {
        for j in 0..p {
            gram[i * p + j] = dirs[i].dot(&dirs[j]);
        }
        rhs[i] = dirs[i].dot(&base);
    }
    let lips: f64 = (0..p).map(|i| gram[i * p + i]).sum::<f64>().max(1e-300);
    let step = 1.0 / lips;
    let mut alpha = vec![0.0; p];
    for _ in 0..600 {
        for i in 0..p {
            let mut g = rhs[i];
            for j in 0..p {
                g += gram[i * p + j] * alpha[j];
            }
            alpha[i] = (alpha[i] - step * g).clamp(lo[i], hi[i]);
        }
    }
    let mut r = base;
    for (a, d) in alpha.iter().zip(&dirs) {
        r.axpy(*a, d);
    }
    (r.norm(), r)
}

/// Append-only record of oracle accesses.
#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub index: u64,
    pub component: usize,
    pub beta: f64,
    /// Present unless point storage was disabled for a large run.
    pub point: Option<Vector>,
}

#[derive(Debug, Clone)]
pub struct QueryLedger {
    records: Vec<QueryRecord>,
    per_component: Vec<u64>,
    store_points: bool,
}

impl QueryLedger {
    pub fn new(m: usize) -> Self {
        QueryLedger {
            records: Vec::new(),
            per_component: vec![0; m],
            store_points: true,
        }
    }

    pub fn without_points(m: usize) -> Self {
        let mut l = QueryLedger::new(m);
        l.store_points = false;
        l
    }

    pub fn record(&mut self, component: usize, beta: f64, point: &Vector) {
        let index = self.records.len() as u64 + 1;
        self.records.push(QueryRecord {
            index,
            component,
            beta,
            point: if self.store_points {
                Some(point.clone())
            } else {
                None
            },
        });
        self.per_component[component] += 1;
    }

    pub fn total(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn per_component(&self) -> &[u64] {
        &self.per_component
    }

    pub fn records(&self) -> &[QueryRecord] {
        &self.records
    }
}

/// The finite-sum problem: m immutable components plus class metadata and,
/// when available, the exact optimum (x*, F*) and ε₀ = F(0) − F*.
#[derive(Clone)]
pub struct Problem {
    components: Vec<Arc<dyn ComponentOracle>>,
    class: FunctionClass,
    optimum: Option<(Vector, f64)>,
    eps0: Option<f64>,
}

impl Problem {
    pub fn new(components: Vec<Arc<dyn ComponentOracle>>, class: FunctionClass) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("need at least one component".into()));
        }
        class.validate()?;
        let d = components[0].dim();
        for c in &components {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.dim(),
                });
            }
        }
        Ok(Problem {
            components,
            class,
            optimum: None,
            eps0: None,
        })
    }

    /// Attaches a known optimum after checking F(x*) ≤ F(x) at 100 sampled
    /// feasible points (and that x* itself is feasible).
    pub fn with_optimum(mut self, x_star: Vector, f_star: f64) -> Result<Self> {
        if x_star.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x_star.dim(),
            });
        }
        if let Some(b) = self.class.radius_b {
            if x_star.norm() > b * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter("optimum outside the domain".into()));
            }
        }
        let fx = self.evaluate_sum(&x_star)?;
        if (fx - f_star).abs() > 1e-6 * (1.0 + f_star.abs()) {
            return Err(Error::InvalidParameter(format!(
                "stated F* = {f_star} but F(x*) = {fx}"
            )));
        }
        let mut rng = rng::rng(0x0bac_5eed);
        let scale = self.class.radius_b.unwrap_or(1.0);
        for _ in 0..100 {
            let mut probe = Vector::zeros(self.dim());
            for v in probe.as_mut_slice() {
                *v = rng.gen_range(-1.0..1.0) * scale;
            }
            let probe = project_ball(&probe, self.class.radius_b);
            let fp = self.evaluate_sum(&probe)?;
            if fp < f_star - 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "claimed optimum beaten at a sampled point: {fp} < {f_star}"
                )));
            }
        }
        self.optimum = Some((x_star, f_star));
        Ok(self)
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = Some(eps0);
        self
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn class(&self) -> &FunctionClass {
        &self.class
    }

    pub fn radius(&self) -> Option<f64> {
        self.class.radius_b
    }

    pub fn component(&self, i: usize) -> &Arc<dyn ComponentOracle> {
        &self.components[i]
    }

    pub fn components(&self) -> &[Arc<dyn ComponentOracle>] {
        &self.components
    }

    pub fn optimum(&self) -> Option<(&Vector, f64)> {
        self.optimum.as_ref().map(|(x, f)| (x, *f))
    }

    pub fn eps0(&self) -> Option<f64> {
        self.eps0
    }

    /// F(x) = (1/m) Σ f_i(x). Out-of-band: does not touch any ledger.
    pub fn evaluate_sum(&self, x: &Vector) -> Result<f64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        let s: f64 = self.components.iter().map(|c| c.value(x)).sum();
        Ok(s / self.m() as f64)
    }

    /// F(x) − F* when the optimum is known.
    pub fn suboptimality(&self, x: &Vector) -> Option<f64> {
        let (_, f_star) = self.optimum.as_ref().map(|(x, f)| (x, *f))?;
        Some(self.evaluate_sum(x).ok()? - f_star)
    }
}

/// The oracle access h_F(x, i, β). Appends exactly one ledger record.
/// x need not be feasible; the prox always returns a feasible point.
pub fn query(
    problem: &Problem,
    x: &Vector,
    i: usize,
    beta: f64,
    ledger: &mut QueryLedger,
) -> Result<OracleResponse> {
    if i >= problem.m() {
        return Err(Error::ComponentOutOfRange {
            index: i,
            m: problem.m(),
        });
    }
    if !(beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    if x.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: x.dim(),
        });
    }
    let comp = &problem.components[i];
    let resp = OracleResponse {
        value: comp.value(x),
        gradient: comp.subgradient(x),
        prox_point: ball_prox(comp.as_ref(), x, beta, problem.radius()),
    };
    ledger.record(i, beta, x);
    Ok(resp)
}

/// A mutable source of oracle answers: either a static [`Problem`] or a
/// live resisting adversary. Solvers are written against this trait so the
/// same code plays the lower-bound game and optimizes fixed instances.
pub trait OracleSource {
    fn m(&self) -> usize;
    fn dim(&self) -> usize;
    fn class(&self) -> FunctionClass;
    fn radius(&self) -> Option<f64> {
        self.class().radius_b
    }
    fn query(
        &mut self,
        i: usize,
        x: &Vector,
        beta: f64,
        ledger: &mut QueryLedger,
    ) -> Result<OracleResponse>;
}

/// Adapter exposing a static problem as an [`OracleSource`].
pub struct ProblemSource<'a>(pub &'a Problem);

impl OracleSource for ProblemSource<'_> {
    fn m(&self) -> usize {
        self.0.m()
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn class(&self) -> FunctionClass {
        self.0.class().clone()
    }
    fn query(
        &mut self,
        i: usize,
        x: &Vector,
        beta: f64,
        ledger: &mut QueryLedger,
    ) -> Result<OracleResponse> {
        query(self.0, x, i, beta, ledger)
    }
}

/// Sanity battery for a component: subgradient inequality at sampled pairs
/// and prox displacement bound ‖prox(x, β) − x‖ ≤ L/β for Lipschitz f.
/// Returns the worst subgradient-inequality violation (negative slack).
pub fn subgradient_inequality_slack(
    comp: &dyn ComponentOracle,
    pairs: usize,
    scale: f64,
    seed: u64,
) -> f64 {
    let mut rng = rng::rng(seed);
    let d = comp.dim();
    let mut worst: f64 = 0.0;
    for _ in 0..pairs {
        let mut x = Vector::zeros(d);
        let mut y = Vector::zeros(d);
        for v in x.as_mut_slice() {
            *v = rng.gen_range(-scale..scale);
        }
        for v in y.as_mut_slice() {
            *v = rng.gen_range(-scale..scale);
        }
        let g = comp.subgradient(&x);
        let lhs = comp.value(&y);
        let rhs = comp.value(&x) + g.dot(&y.sub(&x));
        worst = worst.max(rhs - lhs);
    }
    worst
}
