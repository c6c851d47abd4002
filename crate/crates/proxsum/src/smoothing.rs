//! Moreau-envelope smoothing through the prox oracle.
//!
//! For convex L-Lipschitz f, the envelope f^(β)(x) = inf_u f(u) + (β/2)‖x−u‖²
//! is β-smooth, its gradient is β(x − prox_f(x, β)), and
//! f^(β)(x) ≤ f(x) ≤ f^(β)(x) + L²/(2β) on the domain. Smoothing every
//! component turns a Lipschitz finite sum into a smooth one at the price of
//! one prox query per gradient evaluation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::{ball_prox, ComponentOracle, FunctionClass, Problem, QueryLedger};
use crate::vector::Vector;

/// A component seen through its β-Moreau envelope.
#[derive(Clone)]
pub struct SmoothedComponent {
    base: Arc<dyn ComponentOracle>,
    beta: f64,
    radius: Option<f64>,
}

impl SmoothedComponent {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn base(&self) -> &Arc<dyn ComponentOracle> {
        &self.base
    }

    /// Envelope value and gradient from a single prox call (shared).
    /// Does not touch any ledger; see [`SmoothedComponent::eval_counted`].
    pub fn eval(&self, x: &Vector) -> (f64, Vector) {
        let u = ball_prox(self.base.as_ref(), x, self.beta, self.radius);
        let diff = x.sub(&u);
        let value = self.base.value(&u) + 0.5 * self.beta * diff.dot(&diff);
        (value, diff.scale(self.beta))
    }

    /// Same as [`eval`](Self::eval) but records the underlying prox access:
    /// one smoothed evaluation costs exactly one base-oracle query.
    pub fn eval_counted(
        &self,
        component_index: usize,
        x: &Vector,
        ledger: &mut QueryLedger,
    ) -> (f64, Vector) {
        let out = self.eval(x);
        ledger.record(component_index, self.beta, x);
        out
    }

    pub fn value(&self, x: &Vector) -> f64 {
        self.eval(x).0
    }

    pub fn gradient(&self, x: &Vector) -> Vector {
        self.eval(x).1
    }
}

/// builds the β-Moreau envelope view of one component
pub fn moreau(
    base: Arc<dyn ComponentOracle>,
    beta: f64,
    radius: Option<f64>,
) -> Result<SmoothedComponent> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    Ok(SmoothedComponent { base, beta, radius })
}

/// The smoothed sum F̃^(β) = (1/m) Σ f_i^(β), with derived class metadata.
pub struct SmoothedProblem {
    base: Problem,
    components: Vec<SmoothedComponent>,
    beta: f64,
    class: FunctionClass,
}

impl SmoothedProblem {
    pub fn base(&self) -> &Problem {
        &self.base
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn radius(&self) -> Option<f64> {
        self.base.radius()
    }

    /// Derived class: γ = β, L preserved. The envelope of a λ-strongly
    /// convex component is λβ/(λ+β)-strongly convex (not λ), and the
    /// derived class records that honest modulus.
    pub fn class(&self) -> &FunctionClass {
        &self.class
    }

    pub fn component(&self, i: usize) -> &SmoothedComponent {
        &self.components[i]
    }

    /// F̃^(β)(x), out of band (no ledger).
    pub fn value(&self, x: &Vector) -> f64 {
        self.components.iter().map(|c| c.value(x)).sum::<f64>() / self.m() as f64
    }

    /// Gradient of component i, counting one base query in the ledger.
    pub fn grad_component(&self, i: usize, x: &Vector, ledger: &mut QueryLedger) -> Vector {
        self.components[i].eval_counted(i, x, ledger).1
    }
}

/// Strong-convexity modulus of the β-envelope of a λ-strongly convex
/// function: λβ/(λ+β) (harmonic interpolation; drops to 0 when λ = 0).
pub fn envelope_modulus(lambda: f64, beta: f64) -> f64 {
    if lambda <= 0.0 {
        0.0
    } else {
        lambda * beta / (lambda + beta)
    }
}

/// Smooth every component of a Lipschitz problem with parameter β.
pub fn smooth_sum(problem: &Problem, beta: f64) -> Result<SmoothedProblem> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::NonPositiveBeta(beta));
    }
    let l = problem
        .class()
        .lipschitz_l
        .ok_or(Error::MissingClassData("lipschitz_l required for smoothing"))?;
    let radius = problem.radius();
    let components = problem
        .components()
        .iter()
        .map(|c| moreau(c.clone(), beta, radius))
        .collect::<Result<Vec<_>>>()?;
    let class = FunctionClass {
        lipschitz_l: Some(l),
        smooth_gamma: Some(beta),
        strong_lambda: envelope_modulus(problem.class().strong_lambda, beta),
        radius_b: radius,
    };
    Ok(SmoothedProblem {
        base: problem.clone(),
        components,
        beta,
        class,
    })
}

/// The fixed smoothing level β = L²/ε that makes the smoothed sum an
/// ε/2-faithful surrogate.
pub fn beta_for_epsilon(l: f64, eps: f64) -> Result<f64> {
    if !(l > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta_for_epsilon needs positive inputs, got L = {l}, eps = {eps}"
        )));
    }
    Ok(l * l / eps)
}

/// The stage-wise smoothing schedule for strongly convex Lipschitz sums:
/// β_t = (L²/ε₀)·2^t for t = 0..⌈log₂(ε₀/ε)⌉, each stage cutting the
/// suboptimality by a factor of four.
#[derive(Debug, Clone)]
pub struct AdaptSchedule {
    pub betas: Vec<f64>,
    pub eps0: f64,
    /// Per-stage suboptimality contraction target.
    pub stage_contraction: f64,
}

pub fn adapt_schedule(l: f64, lambda: f64, eps: f64, eps0: Option<f64>) -> Result<AdaptSchedule> {
    if !(l > 0.0 && eps > 0.0) {
        return Err(Error::InvalidParameter(
            "adapt_schedule needs positive L and eps".into(),
        ));
    }
    if !(lambda > 0.0) {
        return Err(Error::NotStronglyConvex);
    }
    // ε₀ ≤ L²/λ always upper-bounds the initial suboptimality.
    let eps0 = eps0.unwrap_or(l * l / lambda);
    let stages = if eps >= eps0 {
        1
    } else {
        (eps0 / eps).log2().ceil() as usize + 1
    };
    let betas = (0..stages)
        .map(|t| l * l / eps0 * 2f64.powi(t as i32))
        .collect();
    Ok(AdaptSchedule {
        betas,
        eps0,
        stage_contraction: 4.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::{AbsDev, Hinge};
    use crate::oracle::FunctionClass;
    use rand::Rng;

    fn abs_comp() -> Arc<dyn ComponentOracle> {
        Arc::new(AbsDev::new(1, 0, 0.0))
    }

    #[test]
    fn moreau_of_abs_examples() {
        let sc = moreau(abs_comp(), 1.0, None).unwrap();
        // x = 2: u = 1, value |1| + ½·1² = 1.5, gradient 1
        let (v, g) = sc.eval(&Vector::from_slice(&[2.0]));
        assert!((v - 1.5).abs() < 1e-12);
        assert!((g[0] - 1.0).abs() < 1e-12);
        // x = 0: fixed point
        let (v, g) = sc.eval(&Vector::from_slice(&[0.0]));
        assert_eq!(v, 0.0);
        assert_eq!(g[0], 0.0);
        // x = 0.5: quadratic branch, u = 0
        let (v, g) = sc.eval(&Vector::from_slice(&[0.5]));
        assert!((v - 0.125).abs() < 1e-12);
        assert!((g[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn eval_counts_one_query() {
        let sc = moreau(abs_comp(), 2.0, None).unwrap();
        let mut ledger = QueryLedger::new(1);
        let _ = sc.eval_counted(0, &Vector::from_slice(&[0.7]), &mut ledger);
        assert_eq!(ledger.total(), 1);
        assert_eq!(ledger.records()[0].beta, 2.0);
    }

    fn lipschitz_test_components() -> Vec<Arc<dyn ComponentOracle>> {
        vec![
            Arc::new(AbsDev::new(2, 0, 1.0)),
            Arc::new(AbsDev::new(2, 1, -0.5)),
            Arc::new(Hinge::new(2, 0, 0.3)),
        ]
    }

    #[test]
    fn sandwich_and_smoothness_hold() {
        let beta = 10.0;
        let l = 1.0;
        let mut rng = crate::rng::rng(5);
        for base in lipschitz_test_components() {
            let sc = moreau(base.clone(), beta, Some(4.0)).unwrap();
            let mut prev: Option<(Vector, Vector)> = None;
            for _ in 0..100 {
                let x = Vector::from_slice(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                let (v, g) = sc.eval(&x);
                let fx = base.value(&x);
                assert!(v <= fx + 1e-9, "envelope above f");
                assert!(fx <= v + l * l / (2.0 * beta) + 1e-9, "sandwich upper");
                if let Some((px, pg)) = prev.take() {
                    let lhs = g.dist(&pg);
                    let rhs = beta * x.dist(&px);
                    assert!(lhs <= rhs * (1.0 + 1e-8) + 1e-12, "beta-smoothness");
                }
                prev = Some((x, g));
            }
        }
    }

    #[test]
    fn envelope_gradient_matches_finite_differences() {
        let mut rng = crate::rng::rng(9);
        for base in lipschitz_test_components() {
            let sc = moreau(base, 3.0, None).unwrap();
            for _ in 0..100 {
                let x = Vector::from_slice(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
                let (_, g) = sc.eval(&x);
                for j in 0..2 {
                    let h = 1e-6;
                    let mut xp = x.clone();
                    xp[j] += h;
                    let mut xm = x.clone();
                    xm[j] -= h;
                    let fd = (sc.value(&xp) - sc.value(&xm)) / (2.0 * h);
                    let denom = g[j].abs().max(1e-3);
                    assert!(
                        (fd - g[j]).abs() / denom <= 1e-5,
                        "fd {fd} vs analytic {}",
                        g[j]
                    );
                }
            }
        }
    }

    #[test]
    fn smooth_sum_class_and_sandwich() {
        let comps: Vec<Arc<dyn ComponentOracle>> = vec![
            Arc::new(AbsDev::new(1, 0, 1.0)),
            Arc::new(AbsDev::new(1, 0, 1.0)),
        ];
        let p = Problem::new(comps, FunctionClass::lipschitz(1.0, Some(3.0))).unwrap();
        let sp = smooth_sum(&p, 10.0).unwrap();
        assert_eq!(sp.class().smooth_gamma, Some(10.0));
        assert_eq!(sp.class().lipschitz_l, Some(1.0));
        // sandwich at x = 0 for f_i = |x − 1|: F̃(0) ≤ 1 ≤ F̃(0) + 0.05
        let x0 = Vector::zeros(1);
        let smoothed = sp.value(&x0);
        let exact = p.evaluate_sum(&x0).unwrap();
        assert_eq!(exact, 1.0);
        assert!(smoothed <= exact && exact <= smoothed + 0.05);
        // β → ∞ collapses the gap
        let tight = smooth_sum(&p, 1e8).unwrap();
        let mut rng = crate::rng::rng(2);
        for _ in 0..20 {
            let x = Vector::from_slice(&[rng.gen_range(-3.0..3.0)]);
            let gap = (p.evaluate_sum(&x).unwrap() - tight.value(&x)).abs();
            assert!(gap <= 5e-9 + 1e-15, "gap {gap}");
        }
        // missing L is an error
        let q = Problem::new(
            vec![Arc::new(crate::components::Quadratic::half_sq_norm(1)) as Arc<dyn ComponentOracle>],
            FunctionClass::smooth(1.0, None),
        )
        .unwrap();
        assert!(smooth_sum(&q, 1.0).is_err());
    }

    #[test]
    fn beta_for_epsilon_values() {
        assert_eq!(beta_for_epsilon(1.0, 0.1).unwrap(), 10.0);
        assert_eq!(beta_for_epsilon(2.0, 1.0).unwrap(), 4.0);
        assert_eq!(beta_for_epsilon(1.0, 1.0).unwrap(), 1.0);
        assert!(beta_for_epsilon(0.0, 1.0).is_err());
        assert!(beta_for_epsilon(1.0, -0.5).is_err());
    }

    #[test]
    fn adapt_schedule_boundaries() {
        // ε = ε₀ → exactly one stage
        let s = adapt_schedule(1.0, 0.5, 2.0, Some(2.0)).unwrap();
        assert_eq!(s.betas.len(), 1);
        // ε = ε₀/8 → four stages with ratios 1:2:4:8
        let s = adapt_schedule(1.0, 0.5, 0.25, Some(2.0)).unwrap();
        assert_eq!(s.betas.len(), 4);
        for (t, b) in s.betas.iter().enumerate() {
            assert!((b / s.betas[0] - 2f64.powi(t as i32)).abs() < 1e-12);
        }
        // not strongly convex is rejected
        assert!(adapt_schedule(1.0, 0.0, 0.1, None).is_err());
    }
}
