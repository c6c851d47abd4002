//! Static hard-instance families for randomized lower bounds.
//!
//! Unlike the resisting oracle, these instances are fixed before any query
//! is made: ⌊m/2⌋ pairs of functions live on orthogonal (k+1)-dimensional
//! subspaces spanned by randomly sampled orthonormal vectors, and the
//! ε-insensitive helpers ψ_c / φ_c keep a query from revealing more than
//! one new vector as long as its inner products with the undiscovered ones
//! stay below c/2 (the span property). The Ω(m) linear family and the
//! one-dimensional Bernoulli family cover the large-ε regimes.

pub mod helpers;
mod pair;

pub use helpers::{phi, psi};
pub use pair::{PairComponent, PairTerm};

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::components::{Linear, Regularized, Zero};
use crate::error::{Error, Result};
use crate::linalg::solve_tridiag;
use crate::oracle::{ComponentOracle, FunctionClass, Problem, QueryLedger};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandVariant {
    LipschitzPairs,
    LipschitzScPairs,
    SmoothPairs,
    SmoothScPairs,
    Linear,
    Bernoulli,
}

impl RandVariant {
    pub fn name(self) -> &'static str {
        match self {
            RandVariant::LipschitzPairs => "lipschitz_pairs",
            RandVariant::LipschitzScPairs => "lipschitz_sc_pairs",
            RandVariant::SmoothPairs => "smooth_pairs",
            RandVariant::SmoothScPairs => "smooth_sc_pairs",
            RandVariant::Linear => "linear",
            RandVariant::Bernoulli => "bernoulli",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "lipschitz_pairs" => RandVariant::LipschitzPairs,
            "lipschitz_sc_pairs" => RandVariant::LipschitzScPairs,
            "smooth_pairs" => RandVariant::SmoothPairs,
            "smooth_sc_pairs" => RandVariant::SmoothScPairs,
            "linear" => RandVariant::Linear,
            "bernoulli" => RandVariant::Bernoulli,
            _ => return None,
        })
    }

    pub fn is_pairs(self) -> bool {
        matches!(
            self,
            RandVariant::LipschitzPairs
                | RandVariant::LipschitzScPairs
                | RandVariant::SmoothPairs
                | RandVariant::SmoothScPairs
        )
    }
}

/// Derived construction constants (normalized where noted).
#[derive(Debug, Clone, Default)]
pub struct RandParams {
    pub eps: f64,
    pub eps0: f64,
    pub l: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub radius: f64,
    pub k: usize,
    /// head target (actual scale)
    pub b: f64,
    /// smooth head coefficient (actual scale)
    pub a: f64,
    /// insensitivity width (actual scale)
    pub c: f64,
    pub lam_tilde: f64,
    pub cap_q: f64,
    pub q: f64,
    pub zeta: f64,
    pub cap_c: f64,
    /// linear-instance coefficient
    pub big_c: f64,
    /// Bernoulli mixture parameter
    pub p: f64,
}

pub struct RandomHardInstance {
    pub variant: RandVariant,
    pub m: usize,
    pub d: usize,
    pub seed: u64,
    pub params: RandParams,
    /// Inputs needed to regenerate this instance from its manifest.
    inputs: ManifestInputs,
    vectors: Arc<Vec<Vector>>,
    signs: Vec<f64>,
    problem: Problem,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
struct ManifestInputs {
    class_a: f64, // L or gamma
    class_b: f64, // B or lambda
    eps: f64,
    eps0: Option<f64>,
    d: Option<usize>,
}

pub const DEFAULT_DIM: usize = 512;

fn sample_orthonormal(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vector>> {
    if n > d {
        return Err(Error::InvalidParameter(format!(
            "cannot fit {n} orthonormal vectors in dimension {d}"
        )));
    }
    let mut vs: Vec<Vector> = Vec::with_capacity(n);
    while vs.len() < n {
        let mut v = Vector::zeros(d);
        for e in v.as_mut_slice() {
            *e = StandardNormal.sample(rng);
        }
        for w in &vs {
            v.axpy(-v.dot(w), w);
        }
        for w in &vs {
            v.axpy(-v.dot(w), w);
        }
        let norm = v.norm();
        if norm > 1e-6 {
            vs.push(v.scale(1.0 / norm));
        }
    }
    Ok(vs)
}

impl RandomHardInstance {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    /// v_{i,r} for pair i (0-based).
    pub fn pair_vector(&self, i: usize, r: usize) -> &Vector {
        &self.vectors[i * (self.params.k + 1) + r]
    }

    pub fn pairs(&self) -> usize {
        self.m / 2
    }

    /// Bernoulli: the realized component signs.
    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    /// Oracle access by (pair, slot) per the construction's indexing.
    pub fn instance_query(
        &self,
        i: usize,
        j: usize,
        x: &Vector,
        beta: f64,
        ledger: &mut QueryLedger,
    ) -> Result<crate::oracle::OracleResponse> {
        if !(1..=2).contains(&j) || i >= self.pairs() {
            return Err(Error::ComponentOutOfRange {
                index: 2 * i + j - 1,
                m: self.m,
            });
        }
        crate::oracle::query(&self.problem, x, 2 * i + (j - 1), beta, ledger)
    }

    /// F(x) − F* using the attached closed-form optimum.
    pub fn exact_suboptimality(&self, x: &Vector) -> Result<f64> {
        self.problem.suboptimality(x).ok_or(Error::NoOptimum)
    }

    /// Average of one pair minus its value at the attached optimum.
    pub fn pair_suboptimality(&self, i: usize, x: &Vector) -> Result<f64> {
        let (x_star, _) = self.problem.optimum().ok_or(Error::NoOptimum)?;
        let f1 = self.problem.component(2 * i);
        let f2 = self.problem.component(2 * i + 1);
        let here = 0.5 * (f1.value(x) + f2.value(x));
        let there = 0.5 * (f1.value(x_star) + f2.value(x_star));
        Ok(here - there)
    }
}

fn common_checks(m: usize, eps: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidParameter("need m >= 2".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter("need eps > 0".into()));
    }
    Ok(())
}

fn pairs_dim(m: usize, k: usize, d: Option<usize>) -> Result<usize> {
    let needed = (k + 1) * m.div_ceil(2);
    let d = d.unwrap_or(DEFAULT_DIM.max(needed));
    if d < needed {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} below structural minimum {needed}"
        )));
    }
    Ok(d)
}

/// Non-smooth pairs (L-Lipschitz on the B-ball).
pub fn lipschitz_pairs(
    m: usize,
    l: f64,
    radius: f64,
    eps: f64,
    d: Option<usize>,
    seed: u64,
) -> Result<RandomHardInstance> {
    common_checks(m, eps)?;
    if !(l > 0.0 && radius > 0.0) {
        return Err(Error::InvalidParameter("need positive L and B".into()));
    }
    let mut warnings = Vec::new();
    let eps_n = eps / (l * radius);
    if eps_n >= 1.0 / (10.0 * (m as f64).sqrt()) {
        warnings.push(format!(
            "eps = {eps} is outside the theorem range eps < LB/(10√m)"
        ));
    }
    let k = ((1.0 / (10.0 * eps_n * (m as f64).sqrt())).floor() as usize).max(1);
    let b_n = (2.0 / (m as f64 * (k + 1) as f64)).sqrt();
    let c_n = eps_n / (k as f64).sqrt();
    let d = pairs_dim(m, k, d)?;
    let mut rng = crate::rng::stream(seed, 0x1b5);
    let vectors = Arc::new(sample_orthonormal(d, (k + 1) * (m / 2), &mut rng)?);

    let head_w = l / 2f64.sqrt();
    let edge_w = l / (2.0 * (k as f64).sqrt());
    let b = b_n * radius;
    let c = c_n * radius;
    let mut comps: Vec<Arc<dyn ComponentOracle>> = Vec::with_capacity(m);
    for i in 0..m / 2 {
        let off = i * (k + 1);
        let mut t1 = vec![PairTerm::AbsHead { w: head_w, b, v: 0 }];
        let mut t2 = Vec::new();
        for r in 1..=k {
            let term = PairTerm::Psi {
                w: edge_w,
                c,
                a: r - 1,
                b: Some(r),
            };
            if r % 2 == 0 {
                t1.push(term);
            } else {
                t2.push(term);
            }
        }
        comps.push(Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t1)));
        comps.push(Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t2)));
    }
    if m % 2 == 1 {
        comps.push(Arc::new(Zero::new(d)));
    }
    let problem = Problem::new(comps, FunctionClass::lipschitz(l, Some(radius)))?;
    // F ≥ 0 and every term vanishes at x_b = b Σ v_{i,r}
    let mut x_star = Vector::zeros(d);
    for v in vectors.iter() {
        x_star.axpy(b, v);
    }
    let f0 = problem.evaluate_sum(&Vector::zeros(d))?;
    let problem = problem.with_optimum(x_star, 0.0)?.with_eps0(f0);
    Ok(RandomHardInstance {
        variant: RandVariant::LipschitzPairs,
        m,
        d,
        seed,
        params: RandParams {
            eps,
            eps0: f0,
            l,
            radius,
            k,
            b,
            c,
            ..Default::default()
        },
        inputs: ManifestInputs {
            class_a: l,
            class_b: radius,
            eps,
            eps0: None,
            d: Some(d),
        },
        vectors,
        signs: vec![],
        problem,
        warnings,
    })
}

/// Strongly convex non-smooth pairs: the Lipschitz pairs on the ball
/// B = √(2ε/λ) plus the regularizer (λ/2)‖x‖².
pub fn lipschitz_sc_pairs(
    m: usize,
    l: f64,
    lambda: f64,
    eps: f64,
    d: Option<usize>,
    seed: u64,
) -> Result<RandomHardInstance> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("need lambda > 0".into()));
    }
    let radius = (2.0 * eps / lambda).sqrt();
    let base = lipschitz_pairs(m, l, radius, 2.0 * eps, d, seed)?;
    let mut warnings = base.warnings.clone();
    if eps >= l * l / (200.0 * lambda * m as f64) {
        warnings.push(format!(
            "eps = {eps} is outside the theorem range eps < L²/(200λm)"
        ));
    }
    let comps: Vec<Arc<dyn ComponentOracle>> = base
        .problem
        .components()
        .iter()
        .map(|c| Arc::new(Regularized::new(c.clone(), lambda)) as Arc<dyn ComponentOracle>)
        .collect();
    let class = FunctionClass::lipschitz(l + lambda * radius, Some(radius)).with_lambda(lambda);
    let problem = Problem::new(comps, class)?;
    let mut params = base.params.clone();
    params.lambda = lambda;
    params.eps = eps;
    Ok(RandomHardInstance {
        variant: RandVariant::LipschitzScPairs,
        m,
        d: base.d,
        seed,
        params,
        inputs: ManifestInputs {
            class_a: l,
            class_b: lambda,
            eps,
            eps0: None,
            d: Some(base.d),
        },
        vectors: base.vectors,
        signs: vec![],
        problem,
        warnings,
    })
}

/// Smooth pairs (γ-smooth on the B-ball).
pub fn smooth_pairs(
    m: usize,
    gamma: f64,
    radius: f64,
    eps: f64,
    d: Option<usize>,
    seed: u64,
) -> Result<RandomHardInstance> {
    common_checks(m, eps)?;
    if !(gamma > 0.0 && radius > 0.0) {
        return Err(Error::InvalidParameter("need positive gamma and B".into()));
    }
    let mut warnings = Vec::new();
    let eps_n = eps / (gamma * radius * radius);
    if eps_n >= 1.0 / (320.0 * m as f64) {
        warnings.push(format!(
            "eps = {eps} is outside the theorem range eps < γB²/(320m)"
        ));
    }
    let k = ((1.0 / (80.0 * eps_n * m as f64).sqrt()).floor() as usize).max(2);
    let a_n = (6.0 / (m as f64 * (k + 1) as f64)).sqrt();
    let c_n = (16.0 * eps_n / k as f64).sqrt();
    let d = pairs_dim(m, k, d)?;
    let mut rng = crate::rng::stream(seed, 0x53b);
    let vectors = Arc::new(sample_orthonormal(d, (k + 1) * (m / 2), &mut rng)?);

    let w = gamma / 16.0;
    let a = a_n * radius;
    let c = c_n * radius;
    let mut comps: Vec<Arc<dyn ComponentOracle>> = Vec::with_capacity(m);
    for i in 0..m / 2 {
        let off = i * (k + 1);
        let mut t1 = vec![PairTerm::QuadHead { w, a, v: 0 }];
        let mut t2 = Vec::new();
        for r in 1..=k {
            let term = PairTerm::Phi {
                w,
                c,
                a: r - 1,
                b: Some(r),
            };
            if r % 2 == 0 {
                t1.push(term);
            } else {
                t2.push(term);
            }
        }
        t2.push(PairTerm::Phi {
            w,
            c,
            a: k,
            b: None,
        });
        comps.push(Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t1)));
        comps.push(Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t2)));
    }
    if m % 2 == 1 {
        comps.push(Arc::new(Zero::new(d)));
    }
    let problem = Problem::new(comps, FunctionClass::smooth(gamma, Some(radius)))?;

    // candidate optimum: per-pair B.3 closed form; exact when every active
    // φ argument clears the 2c margin, verified by the gradient below
    let mut x_star = Vector::zeros(d);
    for i in 0..m / 2 {
        for r in 0..=k {
            let coef = a * (1.0 - (r + 1) as f64 / (k + 2) as f64);
            x_star.axpy(coef, &vectors[i * (k + 1) + r]);
        }
    }
    let margin = a / (k + 2) as f64;
    let mut grad = Vector::zeros(d);
    for comp in problem.components() {
        grad.axpy(1.0 / m as f64, &comp.subgradient(&x_star));
    }
    let stationary = grad.norm() <= 1e-9 * gamma * radius;
    let f0 = problem.evaluate_sum(&Vector::zeros(d))?;
    let (problem, eps0) = if stationary && margin > 2.0 * c {
        let f_star = problem.evaluate_sum(&x_star)?;
        (
            problem.with_optimum(x_star, f_star)?.with_eps0(f0 - f_star),
            f0 - f_star,
        )
    } else {
        warnings.push(format!(
            "closed-form optimum not attached: margin {margin:.3e} vs 2c = {:.3e}, grad {:.3e}",
            2.0 * c,
            grad.norm()
        ));
        (problem, f64::NAN)
    };
    Ok(RandomHardInstance {
        variant: RandVariant::SmoothPairs,
        m,
        d,
        seed,
        params: RandParams {
            eps,
            eps0,
            gamma,
            radius,
            k,
            a,
            c,
            ..Default::default()
        },
        inputs: ManifestInputs {
            class_a: gamma,
            class_b: radius,
            eps,
            eps0: None,
            d: Some(d),
        },
        vectors,
        signs: vec![],
        problem,
        warnings,
    })
}

/// Smooth strongly convex pairs with λ̃ = mλ/γ, Q̃ = ½(1/λ̃ − 1) + 1,
/// ζ = 2/(√Q̃ + 1), and the head coefficient C calibrated so that
/// F(0) − F* = ε₀ exactly (bisection seeded by the closed form).
pub fn smooth_sc_pairs(
    m: usize,
    gamma: f64,
    lambda: f64,
    eps: f64,
    eps0: Option<f64>,
    d: Option<usize>,
    seed: u64,
) -> Result<RandomHardInstance> {
    common_checks(m, eps)?;
    if !(gamma > 0.0 && lambda > 0.0 && gamma > lambda) {
        return Err(Error::InvalidParameter("need gamma > lambda > 0".into()));
    }
    let mut warnings = Vec::new();
    let lam_hat = lambda / gamma;
    let lam_tilde = m as f64 * lam_hat;
    if lam_tilde >= 1.0 / 73.0 {
        warnings.push(format!("λ̃ = {lam_tilde} is outside the proof range λ̃ < 1/73"));
    }
    let eps_n = eps / gamma;
    let eps0_floor = 60.0 * eps / (m as f64 * lam_hat).sqrt();
    let eps0 = eps0.unwrap_or(2.0 * eps0_floor);
    if eps0 < eps0_floor {
        warnings.push(format!(
            "eps0 = {eps0} is below the proof range 60ε/√(mλ/γ) = {eps0_floor}"
        ));
    }
    let cap_q = 0.5 * (1.0 / lam_tilde - 1.0) + 1.0;
    let rq = cap_q.sqrt();
    let q = (rq - 1.0) / (rq + 1.0);
    let zeta = 2.0 / (rq + 1.0);
    let eps0_pair_n = (eps0 / gamma) * m as f64 / (2.0 * (m / 2) as f64);
    let t_max = (((rq - 1.0) / 4.0) * (eps0_pair_n / (20.0 * rq * eps_n)).ln())
        .floor()
        .max(1.0) as usize;
    let k = ((t_max as f64 - 1.0 / (2.0 * q.ln())).ceil() as usize)
        .saturating_sub(1)
        .max(t_max)
        .max(2);
    let c = ((16.0 * eps_n) / ((1.0 - lam_tilde) * (k as f64 + zeta))).sqrt();
    let d = pairs_dim(m, k, d)?;
    let mut rng = crate::rng::stream(seed, 0x55c);
    let vectors = Arc::new(sample_orthonormal(d, (k + 1) * (m / 2), &mut rng)?);

    let w = gamma * (1.0 - lam_tilde) / 16.0;
    let build_problem = |cap_c: f64| -> Result<Problem> {
        let mut comps: Vec<Arc<dyn ComponentOracle>> = Vec::with_capacity(m);
        for i in 0..m / 2 {
            let off = i * (k + 1);
            let mut t1 = vec![PairTerm::QuadHead { w, a: cap_c, v: 0 }];
            let mut t2 = Vec::new();
            for r in 1..=k {
                let term = PairTerm::Phi {
                    w,
                    c,
                    a: r - 1,
                    b: Some(r),
                };
                if r % 2 == 0 {
                    t1.push(term);
                } else {
                    t2.push(term);
                }
            }
            t2.push(PairTerm::Phi {
                w: w * zeta,
                c,
                a: k,
                b: None,
            });
            comps.push(Arc::new(Regularized::new(
                Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t1)),
                lambda,
            )));
            comps.push(Arc::new(Regularized::new(
                Arc::new(PairComponent::new(vectors.clone(), off, k + 1, t2)),
                lambda,
            )));
        }
        if m % 2 == 1 {
            comps.push(Arc::new(Regularized::new(Arc::new(Zero::new(d)), lambda)));
        }
        Problem::new(
            comps,
            FunctionClass::smooth(gamma, None).with_lambda(lambda),
        )
    };

    // per-pair restriction of F is (2w/m)·(squared chain) + (λ/2)‖z‖²;
    // its minimizer in chain coordinates is C·z₁ by linearity
    let unit_coords: Vec<f64> = {
        let n = k + 1;
        let mut diag = vec![0.0; n];
        let mut off_d = vec![0.0; n - 1];
        diag[0] += 1.0;
        diag[n - 1] += zeta;
        for r in 1..n {
            diag[r - 1] += 1.0;
            diag[r] += 1.0;
            off_d[r - 1] -= 1.0;
        }
        let ww = w / m as f64;
        for v in &mut diag {
            *v = lambda + 2.0 * ww * *v;
        }
        for v in &mut off_d {
            *v *= 2.0 * ww;
        }
        let mut rhs = vec![0.0; n];
        rhs[0] = 2.0 * ww;
        solve_tridiag(&diag, &off_d, &rhs)
    };
    let candidate = |cap_c: f64| -> Vector {
        let mut x = Vector::zeros(d);
        for i in 0..m / 2 {
            for r in 0..=k {
                x.axpy(cap_c * unit_coords[r], &vectors[i * (k + 1) + r]);
            }
        }
        x
    };
    let gap_at = |cap_c: f64| -> Result<f64> {
        let p = build_problem(cap_c)?;
        let x = candidate(cap_c);
        Ok(p.evaluate_sum(&Vector::zeros(d))? - p.evaluate_sum(&x)?)
    };
    // seed from the closed form, then bisect on the exact gap
    let mut hi = (8.0 * eps0 / lambda).sqrt() / (rq - 1.0);
    while gap_at(hi)? < eps0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap_at(mid)? < eps0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cap_c = hi;
    if cap_c <= 12.0 * eps_n.sqrt() / (lam_tilde * (rq - 1.0)) {
        warnings.push(format!(
            "C = {cap_c} is outside the proof range C > 12√ε/(λ̃(√Q̃−1))"
        ));
    }
    let problem = build_problem(cap_c)?;
    let x_star = candidate(cap_c);
    // exactness requires every active φ argument past its 2c margin
    let margin = (unit_coords[k - 1] - unit_coords[k])
        .abs()
        .min(unit_coords[k].abs())
        * cap_c;
    let mut grad = Vector::zeros(d);
    for comp in problem.components() {
        grad.axpy(1.0 / m as f64, &comp.subgradient(&x_star));
    }
    let stationary = grad.norm() <= 1e-9 * gamma * cap_c.max(1.0);
    let f0 = problem.evaluate_sum(&Vector::zeros(d))?;
    let (problem, realized_eps0) = if stationary && margin > 2.0 * c {
        let f_star = problem.evaluate_sum(&x_star)?;
        (
            problem.with_optimum(x_star, f_star)?.with_eps0(f0 - f_star),
            f0 - f_star,
        )
    } else {
        warnings.push(format!(
            "closed-form optimum not attached: margin {margin:.3e} vs 2c = {:.3e}, grad {:.3e}",
            2.0 * c,
            grad.norm()
        ));
        (problem, f64::NAN)
    };
    Ok(RandomHardInstance {
        variant: RandVariant::SmoothScPairs,
        m,
        d,
        seed,
        params: RandParams {
            eps,
            eps0: realized_eps0,
            gamma,
            lambda,
            radius: f64::INFINITY,
            k,
            c,
            lam_tilde,
            cap_q,
            q,
            zeta,
            cap_c,
            ..Default::default()
        },
        inputs: ManifestInputs {
            class_a: gamma,
            class_b: lambda,
            eps,
            eps0: Some(eps0),
            d: Some(d),
        },
        vectors,
        signs: vec![],
        problem,
        warnings,
    })
}

/// The Ω(m) family: f_i(x) = C⟨x, v_i⟩ on the unit ball, C = ε√m/0.08.
pub fn linear_instance(m: usize, eps: f64, d: Option<usize>, seed: u64) -> Result<RandomHardInstance> {
    common_checks(m, eps)?;
    let big_c = eps * (m as f64).sqrt() / 0.08;
    let needed = m;
    let d = d.unwrap_or(DEFAULT_DIM.max(needed));
    if d < needed {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} below structural minimum {needed}"
        )));
    }
    let mut rng = crate::rng::stream(seed, 0x71e);
    let vectors = Arc::new(sample_orthonormal(d, m, &mut rng)?);
    let comps: Vec<Arc<dyn ComponentOracle>> = vectors
        .iter()
        .map(|v| Arc::new(Linear::new(v.scale(big_c))) as Arc<dyn ComponentOracle>)
        .collect();
    let problem = Problem::new(comps, FunctionClass::lipschitz(big_c, Some(1.0)))?;
    let mut x_star = Vector::zeros(d);
    for v in vectors.iter() {
        x_star.axpy(-1.0 / (m as f64).sqrt(), v);
    }
    let f_star = -big_c / (m as f64).sqrt();
    let problem = problem.with_optimum(x_star, f_star)?.with_eps0(-f_star);
    Ok(RandomHardInstance {
        variant: RandVariant::Linear,
        m,
        d,
        seed,
        params: RandParams {
            eps,
            eps0: -f_star,
            l: big_c,
            radius: 1.0,
            big_c,
            ..Default::default()
        },
        inputs: ManifestInputs {
            class_a: 1.0,
            class_b: 1.0,
            eps,
            eps0: None,
            d: Some(d),
        },
        vectors,
        signs: vec![],
        problem,
        warnings: vec![],
    })
}

/// The information-theoretic family: each f_i(x) = ±x on [−B, B], signs
/// drawn once with P(+1) = p and p itself a ±2ε coin flip around 1/2.
pub fn bernoulli_instance(m: usize, eps: f64, radius: f64, seed: u64) -> Result<RandomHardInstance> {
    common_checks(m, eps)?;
    let mut warnings = Vec::new();
    if !(eps < 0.25 && eps > 10.0 / (m as f64).sqrt()) {
        warnings.push(format!(
            "(m, eps) = ({m}, {eps}) is outside the theorem range stated for the Bernoulli family"
        ));
    }
    let mut rng = crate::rng::stream(seed, 0xbe12);
    let p = if rng.gen_bool(0.5) {
        0.5 - 2.0 * eps
    } else {
        0.5 + 2.0 * eps
    };
    let signs: Vec<f64> = (0..m)
        .map(|_| if rng.gen_bool(p) { 1.0 } else { -1.0 })
        .collect();
    let comps: Vec<Arc<dyn ComponentOracle>> = signs
        .iter()
        .map(|&s| Arc::new(Linear::new(Vector::from_slice(&[s]))) as Arc<dyn ComponentOracle>)
        .collect();
    let problem = Problem::new(comps, FunctionClass::lipschitz(1.0, Some(radius)))?;
    let total: f64 = signs.iter().sum();
    let x_star = Vector::from_slice(&[-total.signum() * radius]);
    let f_star = -total.abs() / m as f64 * radius;
    let problem = problem.with_optimum(x_star, f_star)?;
    Ok(RandomHardInstance {
        variant: RandVariant::Bernoulli,
        m,
        d: 1,
        seed,
        params: RandParams {
            eps,
            l: 1.0,
            radius,
            p,
            ..Default::default()
        },
        inputs: ManifestInputs {
            class_a: 1.0,
            class_b: radius,
            eps,
            eps0: None,
            d: Some(1),
        },
        vectors: Arc::new(vec![]),
        signs,
        problem,
        warnings,
    })
}

/// Plug-in sign estimator for the Bernoulli family: query n components at
/// the origin, majority-vote the subgradient signs (+1 on ties or with no
/// queries at all).
pub fn bernoulli_sign_estimate(
    inst: &RandomHardInstance,
    n_queries: u64,
    seed: u64,
    ledger: &mut QueryLedger,
) -> Result<f64> {
    let mut rng = crate::rng::stream(seed, 0xe571);
    let x0 = Vector::zeros(1);
    let mut total = 0.0;
    for _ in 0..n_queries {
        let i = rng.gen_range(0..inst.m);
        let resp = crate::oracle::query(&inst.problem, &x0, i, 1.0, ledger)?;
        total += resp.gradient[0];
    }
    Ok(if total >= 0.0 { 1.0 } else { -1.0 })
}

/// Majority sign of the realized components (+1 on ties).
pub fn bernoulli_true_sign(inst: &RandomHardInstance) -> f64 {
    let total: f64 = inst.signs.iter().sum();
    if total >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Result of one span-property probe.
#[derive(Debug, Clone)]
pub struct SpanCheck {
    pub precondition_ok: bool,
    pub grad_leak: [f64; 2],
    pub prox_leak: [f64; 2],
}

impl SpanCheck {
    pub fn ok(&self, tol: f64) -> bool {
        self.precondition_ok
            && self.grad_leak.iter().all(|&v| v <= tol)
            && self.prox_leak.iter().all(|&v| v <= tol)
    }
}

/// Verifies the four span-property containments at x for pair i and query
/// counter t: gradients and proxes of the pair reveal at most v_{i,t},
/// with the reachable index set depending on the parity of t.
pub fn check_span_property(
    inst: &RandomHardInstance,
    i: usize,
    x: &Vector,
    t: usize,
    beta: f64,
) -> Result<SpanCheck> {
    if !inst.variant.is_pairs() {
        return Err(Error::InvalidParameter(
            "span property applies to pair variants".into(),
        ));
    }
    let k = inst.params.k;
    if t > k || i >= inst.pairs() {
        return Err(Error::InvalidParameter("need t <= k and a valid pair".into()));
    }
    let c = inst.params.c;
    let mut precondition_ok = true;
    for r in t..=k {
        if x.dot(inst.pair_vector(i, r)).abs() >= c / 2.0 {
            precondition_ok = false;
        }
    }
    if !precondition_ok {
        return Ok(SpanCheck {
            precondition_ok,
            grad_leak: [f64::NAN; 2],
            prox_leak: [f64::NAN; 2],
        });
    }
    // allowed top index per slot: slot 1 sees v_{i,t} on even t, slot 2 on odd t
    let allowed_top = |slot: usize| -> isize {
        let reaches_t = (slot == 1) == (t % 2 == 0);
        if reaches_t {
            t as isize
        } else {
            t as isize - 1
        }
    };
    let mut grad_leak = [0.0f64; 2];
    let mut prox_leak = [0.0f64; 2];
    for slot in 1..=2 {
        let comp = inst.problem.component(2 * i + (slot - 1));
        let top = allowed_top(slot);
        // orthonormal basis of span{x, v_{i,0..top}}; leakage is measured
        // on the residual after projecting onto it (x itself belongs to
        // the span, which absorbs the λx part of SC gradients)
        let mut ortho: Vec<Vector> = Vec::new();
        let push = |v: &Vector, ortho: &mut Vec<Vector>| {
            let mut r = v.clone();
            for w in ortho.iter() {
                r.axpy(-r.dot(w), w);
            }
            for w in ortho.iter() {
                r.axpy(-r.dot(w), w);
            }
            let n = r.norm();
            if n > 1e-12 * v.norm().max(1.0) {
                ortho.push(r.scale(1.0 / n));
            }
        };
        for r in 0..=k {
            if (r as isize) <= top {
                push(inst.pair_vector(i, r), &mut ortho);
            }
        }
        push(x, &mut ortho);
        let forbidden_leak = |v: &Vector| -> f64 {
            let mut resid = v.clone();
            for w in &ortho {
                resid.axpy(-resid.dot(w), w);
            }
            let mut leak = 0.0f64;
            for r in 0..=k {
                if (r as isize) > top {
                    leak = leak.max(resid.dot(inst.pair_vector(i, r)).abs());
                }
            }
            leak
        };
        grad_leak[slot - 1] = forbidden_leak(&comp.subgradient(x));
        let p = crate::oracle::ball_prox(comp.as_ref(), x, beta, inst.problem.radius());
        prox_leak[slot - 1] = forbidden_leak(&p);
    }
    Ok(SpanCheck {
        precondition_ok,
        grad_leak,
        prox_leak,
    })
}

/// The dimension Lemma C.2 requires for the high-probability guarantee:
/// d ≥ (32B²N/c²)·ln(kN/δ) (natural logarithm).
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryDimension {
    pub n_queries: u64,
    pub radius: f64,
    pub c: f64,
    pub k: usize,
    pub delta_fail: f64,
    pub d_required: u64,
}

pub fn theory_dimension(
    radius: f64,
    n_queries: u64,
    c: f64,
    k: usize,
    delta_fail: f64,
) -> Result<TheoryDimension> {
    if !(radius > 0.0 && c > 0.0) || !(delta_fail > 0.0 && delta_fail < 1.0) || k == 0 {
        return Err(Error::InvalidParameter(
            "theory_dimension needs positive inputs and delta in (0,1)".into(),
        ));
    }
    let d_required = if n_queries == 0 {
        0
    } else {
        let n = n_queries as f64;
        ((32.0 * radius * radius * n / (c * c)) * ((k as f64 * n / delta_fail).ln()))
            .ceil() as u64
    };
    Ok(TheoryDimension {
        n_queries,
        radius,
        c,
        k,
        delta_fail,
        d_required,
    })
}

impl RandomHardInstance {
    /// Self-describing text manifest: the inputs, from which the vectors
    /// regenerate bit-for-bit.
    pub fn to_manifest(&self) -> String {
        let i = &self.inputs;
        let mut s = String::new();
        let _ = writeln!(s, "proxsum-instance v1");
        let _ = writeln!(s, "variant = {}", self.variant.name());
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "eps = {}", i.eps);
        if let Some(e0) = i.eps0 {
            let _ = writeln!(s, "eps0 = {e0}");
        }
        let _ = writeln!(s, "class_a = {}", i.class_a);
        let _ = writeln!(s, "class_b = {}", i.class_b);
        if let Some(d) = i.d {
            let _ = writeln!(s, "d = {d}");
        }
        s
    }

    pub fn from_manifest(text: &str) -> Result<RandomHardInstance> {
        let mut kv = std::collections::BTreeMap::new();
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "proxsum-instance v1" => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "manifest must start with 'proxsum-instance v1'".into(),
                ))
            }
        }
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("bad manifest line: {line}")))?;
            kv.insert(key.trim().to_string(), val.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k)
                .ok_or_else(|| Error::InvalidParameter(format!("manifest missing key {k}")))
        };
        let parse_f = |k: &str| -> Result<f64> {
            get(k)?
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad number for {k}")))
        };
        let variant = RandVariant::parse(get("variant")?)
            .ok_or_else(|| Error::InvalidParameter("unknown variant".into()))?;
        let m: usize = get("m")?
            .parse()
            .map_err(|_| Error::InvalidParameter("bad m".into()))?;
        let seed: u64 = get("seed")?
            .parse()
            .map_err(|_| Error::InvalidParameter("bad seed".into()))?;
        let eps = parse_f("eps")?;
        let d: Option<usize> = kv.get("d").map(|s| s.parse().unwrap_or(DEFAULT_DIM));
        let a = parse_f("class_a")?;
        let b = parse_f("class_b")?;
        let eps0 = kv.get("eps0").and_then(|s| s.parse().ok());
        match variant {
            RandVariant::LipschitzPairs => lipschitz_pairs(m, a, b, eps, d, seed),
            RandVariant::LipschitzScPairs => lipschitz_sc_pairs(m, a, b, eps, d, seed),
            RandVariant::SmoothPairs => smooth_pairs(m, a, b, eps, d, seed),
            RandVariant::SmoothScPairs => smooth_sc_pairs(m, a, b, eps, eps0, d, seed),
            RandVariant::Linear => linear_instance(m, eps, d, seed),
            RandVariant::Bernoulli => bernoulli_instance(m, eps, b, seed),
        }
    }
}
