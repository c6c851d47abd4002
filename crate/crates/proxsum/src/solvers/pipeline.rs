//! Composed pipelines: the regularization reduction, fixed-β smoothing
//! followed by an accelerated method, and the stage-wise doubling schedule
//! for strongly convex Lipschitz sums.

use std::sync::Arc;

use crate::components::Regularized;
use crate::error::{Error, Result};
use crate::oracle::{ComponentOracle, FunctionClass, Problem, ProblemSource, QueryLedger};
use crate::smoothing::{adapt_schedule, beta_for_epsilon, envelope_modulus};
use crate::vector::Vector;

use super::{agd, catalyst_svrg, GradMode, RunTrace, SolverConfig, TracePoint};

/// Adds (λ/2)‖x‖² with λ = ε/B² to every component. An ε/2-solution of
/// the produced problem is ε-suboptimal for the original. The optimum
/// metadata is dropped (the regularized optimum moves); the Lipschitz
/// constant grows to L + λB on the ball.
pub fn regularize_reduce(problem: &Problem, eps: f64, b: f64) -> Result<Problem> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if !(b > 0.0) {
        return Err(Error::MissingClassData("radius B"));
    }
    let lambda = eps / (b * b);
    let comps: Vec<Arc<dyn ComponentOracle>> = problem
        .components()
        .iter()
        .map(|c| Arc::new(Regularized::new(c.clone(), lambda)) as Arc<dyn ComponentOracle>)
        .collect();
    let old = problem.class();
    let class = FunctionClass {
        lipschitz_l: old.lipschitz_l.map(|l| l + lambda * b),
        smooth_gamma: old.smooth_gamma.map(|g| g + lambda),
        strong_lambda: old.strong_lambda + lambda,
        radius_b: old.radius_b.or(Some(b)),
    };
    Problem::new(comps, class)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothedMode {
    DeterministicAgd,
    RandomizedAccel,
}

/// Inner solver handle for the stage-wise schedule. Each variant carries
/// a linear-rate certificate from which stage budgets are derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageInner {
    Agd,
    CatalystSvrg,
}

/// Minimizes a Lipschitz finite sum through the prox oracle.
///
/// Convex path (λ = 0, B required): smooth at β = L²/ε, then run AGD for
/// the analytic iteration count ⌈2LB/ε⌉ (deterministic mode) or
/// Catalyst-accelerated SVRG on the regularized-and-smoothed sum until the
/// budget runs out (randomized mode). Strongly convex path (λ > 0): the
/// doubling schedule of [`adapt_smooth`].
pub fn smoothed_minimize(
    problem: &Problem,
    eps: f64,
    mode: SmoothedMode,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let class = problem.class();
    let l = class.lipschitz_l.ok_or(Error::MissingClassData("lipschitz_l"))?;
    if class.strong_lambda > 0.0 {
        let inner = match mode {
            SmoothedMode::DeterministicAgd => StageInner::Agd,
            SmoothedMode::RandomizedAccel => StageInner::CatalystSvrg,
        };
        return adapt_smooth(problem, eps, inner, cfg, ledger);
    }
    let b = class.radius_b.ok_or(Error::MissingClassData("radius_b"))?;
    match mode {
        SmoothedMode::DeterministicAgd => {
            let beta = beta_for_epsilon(l, eps)?;
            // 2βB²/(k+1)² ≤ ε/2 with β = L²/ε gives k + 1 ≥ 2LB/ε
            let iters = (2.0 * l * b / eps).ceil() as u64;
            let stage_cfg = SolverConfig {
                max_iterations: Some(iters),
                ..cfg.clone()
            };
            agd(
                &mut ProblemSource(problem),
                GradMode::Smoothed(beta),
                &stage_cfg,
                ledger,
            )
        }
        SmoothedMode::RandomizedAccel => {
            // Error split: λB²/2 = ε/4 from the regularizer, L²/(2β) = ε/4
            // from smoothing, the rest from the inner solver.
            let reg = regularize_reduce(problem, eps / 2.0, b)?;
            let l_reg = reg.class().lipschitz_l.unwrap_or(l);
            let beta = 2.0 * l_reg * l_reg / eps;
            catalyst_svrg(
                &mut ProblemSource(&reg),
                GradMode::Smoothed(beta),
                cfg,
                ledger,
            )
        }
    }
}

/// Stage-wise smoothing for strongly convex Lipschitz sums: stage t
/// optimizes the β_t-smoothed sum, β_t = (L²/ε₀)2^t, for an iteration
/// budget that certifies a factor-4 suboptimality decrease, warm-starting
/// at the previous stage's iterate. Starts at the origin, whose
/// suboptimality ε₀ anchors the schedule.
pub fn adapt_smooth(
    problem: &Problem,
    eps: f64,
    inner: StageInner,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let class = problem.class();
    let l = class.lipschitz_l.ok_or(Error::MissingClassData("lipschitz_l"))?;
    let lambda = class.strong_lambda;
    if lambda <= 0.0 {
        return Err(Error::NotStronglyConvex);
    }
    let schedule = adapt_schedule(l, lambda, eps, problem.eps0())?;
    let m = problem.m() as u64;
    let mut x = Vector::zeros(problem.dim());
    let mut points: Vec<TracePoint> = vec![TracePoint {
        queries: ledger.total(),
        x: x.clone(),
        suboptimality: None,
    }];

    for &beta_t in &schedule.betas {
        if ledger.total() + m > cfg.budget {
            break;
        }
        let mu_t = envelope_modulus(lambda, beta_t);
        let kappa_t = beta_t / mu_t;
        // AGD-SC certificate: subopt ≤ 2(1 − 1/√κ)^k · initial; the extra
        // factor 2 over the contraction target 4 gives ln 8.
        let contraction = schedule.stage_contraction;
        let stage_trace = match inner {
            StageInner::Agd => {
                let rho = 1.0 - 1.0 / kappa_t.sqrt();
                let iters = ((2.0 * contraction).ln() / -rho.ln()).ceil().max(1.0) as u64;
                let stage_cfg = SolverConfig {
                    max_iterations: Some(iters),
                    start: Some(x.clone()),
                    ..cfg.clone()
                };
                agd(
                    &mut ProblemSource(problem),
                    GradMode::Smoothed(beta_t),
                    &stage_cfg,
                    ledger,
                )?
            }
            StageInner::CatalystSvrg => {
                let stage_queries = (4.0
                    * (m as f64 + (m as f64 * kappa_t).sqrt())
                    * (2.0 * contraction).ln())
                .ceil() as u64;
                let stage_cfg = SolverConfig {
                    budget: (ledger.total() + stage_queries).min(cfg.budget),
                    start: Some(x.clone()),
                    ..cfg.clone()
                };
                catalyst_svrg(
                    &mut ProblemSource(problem),
                    GradMode::Smoothed(beta_t),
                    &stage_cfg,
                    ledger,
                )?
            }
        };
        if let Some(fx) = stage_trace.final_x() {
            x = fx.clone();
        }
        for p in stage_trace.points {
            if points.last().map_or(true, |q| p.queries > q.queries) {
                points.push(p);
            }
        }
    }
    Ok(RunTrace { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::median_problem;

    #[test]
    fn regularize_reduce_parameters() {
        let p = median_problem(&[0.0, 1.0, 2.0], 1.0).unwrap();
        let r = regularize_reduce(&p, 0.1, 1.0).unwrap();
        assert!((r.class().strong_lambda - 0.1).abs() < 1e-15);
        // component values at the origin unchanged
        let x0 = Vector::zeros(1);
        for (a, b) in p.components().iter().zip(r.components()) {
            assert_eq!(a.value(&x0), b.value(&x0));
        }
        assert!(regularize_reduce(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn smoothed_minimize_median_reaches_target() {
        let p = median_problem(&[0.0, 1.0, 2.0], 3.0).unwrap();
        let eps = 0.01;
        let cfg = SolverConfig::with_budget(2_000_000);
        let mut ledger = QueryLedger::without_points(p.m());
        let trace =
            smoothed_minimize(&p, eps, SmoothedMode::DeterministicAgd, &cfg, &mut ledger).unwrap();
        let x_hat = trace.final_x().unwrap();
        let sub = p.evaluate_sum(x_hat).unwrap() - 2.0 / 3.0;
        assert!(sub < eps, "suboptimality {sub}");
        assert!(ledger.total() <= cfg.budget);
    }
}
