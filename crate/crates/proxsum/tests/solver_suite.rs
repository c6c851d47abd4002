//! Solver behavior against classical convergence bounds, with the optimum
//! known exactly or from an independent reference solve.

use proxsum::components::{least_squares_problem, median_problem, Quadratic};
use proxsum::oracle::{ComponentOracle, FunctionClass, Problem, ProblemSource, QueryLedger};
use proxsum::smoothing::adapt_schedule;
use proxsum::solvers::{
    adapt_smooth, agd, catalyst_svrg, gd, regularize_reduce, smoothed_minimize, subgradient_sgd,
    svrg, GradMode, RunTrace, SmoothedMode, SolverConfig, StageInner,
};
use proxsum::Vector;
use std::sync::Arc;

fn measure(trace: &mut RunTrace, p: &Problem) {
    let (_, f_star) = p.optimum().unwrap();
    trace.measure(|x| p.evaluate_sum(x).unwrap(), f_star);
}

#[test]
fn gd_exact_step_on_unit_quadratic() {
    let p = Problem::new(
        vec![Arc::new(Quadratic::half_sq_norm(1)) as Arc<dyn ComponentOracle>],
        FunctionClass::smooth(1.0, None),
    )
    .unwrap();
    let cfg = SolverConfig {
        budget: 1,
        start: Some(Vector::from_slice(&[1.0])),
        record_every: Some(1),
        ..Default::default()
    };
    let mut ledger = QueryLedger::new(1);
    let trace = gd(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    assert_eq!(trace.final_x().unwrap().as_slice(), &[0.0]);
    assert_eq!(ledger.total(), 1);
}

#[test]
fn gd_queries_m_per_iteration_and_meets_classical_bound() {
    let p = least_squares_problem(8, 5, 0.0, 3).unwrap();
    let cfg = SolverConfig {
        budget: 8 * 60,
        record_every: Some(1),
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(p.m());
    let mut trace = gd(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    assert_eq!(ledger.total(), 8 * 60);
    measure(&mut trace, &p);
    let (x_star, _) = p.optimum().unwrap();
    let r2 = x_star.dot(x_star);
    for pt in &trace.points {
        if pt.queries == 0 {
            continue;
        }
        assert_eq!(pt.queries % 8, 0);
        let k = (pt.queries / 8) as f64;
        let bound = r2 / (2.0 * k);
        assert!(
            pt.suboptimality.unwrap() <= bound + 1e-12,
            "k = {k}: {} > {bound}",
            pt.suboptimality.unwrap()
        );
    }
}

#[test]
fn agd_linear_convergence_on_conditioned_quadratic() {
    let p = Problem::new(
        vec![Arc::new(Quadratic::half_sq_norm(1)) as Arc<dyn ComponentOracle>],
        FunctionClass::smooth(1.0, None).with_lambda(1.0),
    )
    .unwrap();
    let cfg = SolverConfig {
        budget: 100,
        start: Some(Vector::from_slice(&[1.0])),
        ..Default::default()
    };
    let mut ledger = QueryLedger::new(1);
    let trace = agd(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    let x = trace.final_x().unwrap();
    assert!(0.5 * x[0] * x[0] < 1e-10);
}

#[test]
fn agd_meets_fista_bound_everywhere() {
    let p = least_squares_problem(8, 5, 0.0, 11).unwrap();
    let cfg = SolverConfig {
        budget: 8 * 80,
        record_every: Some(1),
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(p.m());
    let mut trace = agd(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    measure(&mut trace, &p);
    let (x_star, _) = p.optimum().unwrap();
    let r2 = x_star.dot(x_star);
    for pt in &trace.points {
        if pt.queries == 0 {
            continue;
        }
        let k = (pt.queries / 8) as f64;
        let bound = 2.0 * r2 / (k + 1.0) / (k + 1.0);
        assert!(
            pt.suboptimality.unwrap() <= bound + 1e-12,
            "k = {k}: {} > {bound}",
            pt.suboptimality.unwrap()
        );
    }
}

#[test]
fn sgd_averaged_iterate_meets_lb_over_sqrt_t() {
    // single |x| component on [−1, 1], exact optimum 0
    let p = median_problem(&[0.0], 1.0).unwrap();
    for t in [100u64, 10_000] {
        let cfg = SolverConfig {
            budget: t,
            seed: 5,
            start: Some(Vector::from_slice(&[1.0])),
            ..Default::default()
        };
        let mut ledger = QueryLedger::without_points(1);
        let trace = subgradient_sgd(&mut ProblemSource(&p), &cfg, &mut ledger).unwrap();
        let sub = p.evaluate_sum(trace.final_x().unwrap()).unwrap();
        let bound = 3.0 / (t as f64).sqrt();
        assert!(sub <= bound, "T = {t}: {sub} > {bound}");
        assert_eq!(ledger.total(), t);
    }
}

#[test]
fn svrg_handles_degenerate_single_component() {
    let p = Problem::new(
        vec![Arc::new(Quadratic::half_sq_norm(2)) as Arc<dyn ComponentOracle>],
        FunctionClass::smooth(1.0, None).with_lambda(1.0),
    )
    .unwrap();
    let cfg = SolverConfig {
        budget: 600,
        seed: 1,
        start: Some(Vector::from_slice(&[2.0, -1.0])),
        ..Default::default()
    };
    let mut ledger = QueryLedger::new(1);
    let trace = svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
    let x = trace.final_x().unwrap();
    assert!(x.norm() < 1e-6, "‖x‖ = {}", x.norm());
}

#[test]
fn svrg_rejects_non_strongly_convex_input() {
    let p = least_squares_problem(4, 8, 0.0, 2).unwrap();
    let cfg = SolverConfig::with_budget(100);
    let mut ledger = QueryLedger::new(4);
    assert!(svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).is_err());
}

#[test]
fn svrg_epoch_accounting_and_median_seed_contraction() {
    // κ = 100 least squares
    let m = 64;
    let lambda = 0.01;
    let p = least_squares_problem(m, 30, lambda, 7).unwrap();
    let epochs = 12u64;
    let epoch_cost = (m + 2 * m) as u64;
    let mut ratios_per_seed: Vec<Vec<f64>> = Vec::new();
    for seed in 0..5u64 {
        let cfg = SolverConfig {
            budget: epochs * epoch_cost,
            seed,
            record_every: Some(1),
            ..Default::default()
        };
        let mut ledger = QueryLedger::without_points(m);
        let mut trace = svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut ledger).unwrap();
        // per-epoch query count is m + epoch_length exactly
        assert_eq!(ledger.total(), epochs * epoch_cost);
        measure(&mut trace, &p);
        let subs: Vec<f64> = trace
            .points
            .iter()
            .filter(|pt| pt.queries > 0)
            .map(|pt| pt.suboptimality.unwrap())
            .collect();
        let ratios: Vec<f64> = subs.windows(2).map(|w| w[0] / w[1].max(1e-300)).collect();
        ratios_per_seed.push(ratios);
    }
    let n = ratios_per_seed[0].len();
    for j in 0..n {
        let mut col: Vec<f64> = ratios_per_seed.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        let median = col[2];
        assert!(median >= 1.5, "epoch {j}: median ratio {median}");
    }
}

#[test]
fn catalyst_uses_fewer_queries_than_plain_svrg_on_ill_conditioned_sum() {
    // condition number 10⁴
    let m = 64;
    let lambda = 1e-4;
    let p = least_squares_problem(m, 30, lambda, 13).unwrap();
    let (_, f_star) = p.optimum().unwrap();
    let target = 1e-6;
    let queries_to = |trace: &mut RunTrace, ledger: &QueryLedger| -> Option<u64> {
        trace.measure(|x| p.evaluate_sum(x).unwrap(), f_star);
        let q = trace.queries_to(target);
        assert!(ledger.total() <= 600_000);
        q
    };
    let cfg = SolverConfig {
        budget: 600_000,
        seed: 4,
        record_every: Some(1),
        ..Default::default()
    };
    let mut l1 = QueryLedger::without_points(m);
    let mut t1 = svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut l1).unwrap();
    let q_svrg = queries_to(&mut t1, &l1);
    let mut l2 = QueryLedger::without_points(m);
    let mut t2 = catalyst_svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut l2).unwrap();
    let q_cat = queries_to(&mut t2, &l2);
    let (q_svrg, q_cat) = (q_svrg.expect("svrg reached target"), q_cat.expect("catalyst reached target"));
    assert!(
        q_cat < q_svrg,
        "catalyst {q_cat} queries vs svrg {q_svrg}"
    );
}

#[test]
fn regularized_reduction_prox_matches_numeric_inner_solve() {
    let p = median_problem(&[0.0, 1.0, 2.0], 2.0).unwrap();
    let r = regularize_reduce(&p, 0.2, 2.0).unwrap();
    let x = Vector::from_slice(&[1.4]);
    let beta = 0.7;
    let comp = r.component(1).clone();
    let fast = comp.prox_free(&x, beta);
    let brute = proxsum::brute::brute_prox_free(comp.as_ref(), &x, beta, 20_000, 0.0);
    assert!(fast.dist(&brute.point) <= 1e-8 + brute.residual / beta);
}

#[test]
fn adapt_smooth_reaches_eps_within_query_budget_form() {
    // strongly convex median-type instance: |x − a_i| + (λ/2)x²
    let m = 4;
    let base = median_problem(&[0.0, 0.5, 1.2, 2.0], 1.0).unwrap();
    let lambda = 0.01;
    let reg = regularize_reduce(&base, lambda, 1.0).unwrap();
    let l = reg.class().lipschitz_l.unwrap();
    // reference optimum by bisection on the monotone mean subgradient
    let mean_subgrad = |x: f64| -> f64 {
        let g: f64 = [0.0, 0.5, 1.2, 2.0]
            .iter()
            .map(|&a| {
                if x > a {
                    1.0
                } else if x < a {
                    -1.0
                } else {
                    0.0
                }
            })
            .sum();
        g / m as f64 + lambda * x
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean_subgrad(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x_ref = Vector::from_slice(&[0.5 * (lo + hi)]);
    let f_ref = reg.evaluate_sum(&x_ref).unwrap();

    for eps in [0.02, 0.005] {
        let cfg = SolverConfig::with_budget(10_000_000);
        let mut ledger = QueryLedger::without_points(m);
        let trace = adapt_smooth(&reg, eps, StageInner::Agd, &cfg, &mut ledger).unwrap();
        let sub = reg.evaluate_sum(trace.final_x().unwrap()).unwrap() - f_ref;
        assert!(sub < eps, "eps {eps}: suboptimality {sub}");
        let budget_form = 50.0 * m as f64 * l / (lambda * eps).sqrt();
        assert!(
            (ledger.total() as f64) <= budget_form,
            "eps {eps}: {} queries > {budget_form}",
            ledger.total()
        );
    }
}

#[test]
fn adapt_schedule_runs_expected_stage_count() {
    // ε = ε₀/8 → 4 stages with β ratios 1:2:4:8 (schedule checked in unit
    // tests); here: the driver consumes exactly the scheduled stages
    let base = median_problem(&[0.0, 1.0], 1.0).unwrap();
    let reg = regularize_reduce(&base, 0.5, 1.0).unwrap().with_eps0(0.8);
    let s = adapt_schedule(
        reg.class().lipschitz_l.unwrap(),
        reg.class().strong_lambda,
        0.1,
        reg.eps0(),
    )
    .unwrap();
    assert_eq!(s.betas.len(), 4);
}

#[test]
fn smoothed_minimize_deterministic_and_randomized_reach_target() {
    let p = median_problem(&[0.0, 1.0, 2.0], 3.0).unwrap();
    let eps = 0.01;
    let (_, f_star) = p.optimum().unwrap();

    let cfg = SolverConfig::with_budget(4_000_000);
    let mut ledger = QueryLedger::without_points(p.m());
    let t = smoothed_minimize(&p, eps, SmoothedMode::DeterministicAgd, &cfg, &mut ledger).unwrap();
    let sub = p.evaluate_sum(t.final_x().unwrap()).unwrap() - f_star;
    assert!(sub < eps, "deterministic: {sub}");

    let cfg = SolverConfig {
        budget: 400_000,
        seed: 2,
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(p.m());
    let t = smoothed_minimize(&p, eps, SmoothedMode::RandomizedAccel, &cfg, &mut ledger).unwrap();
    let sub = p.evaluate_sum(t.final_x().unwrap()).unwrap() - f_star;
    assert!(sub < eps, "randomized: {sub}");
}

#[test]
fn all_solvers_respect_budget_and_feasibility() {
    let p = median_problem(&[0.0, 1.0, 2.0, 2.5], 3.0).unwrap();
    let reg = regularize_reduce(&p, 0.1, 3.0).unwrap();
    let budget = 777u64;
    let cfg = SolverConfig {
        budget,
        seed: 9,
        record_every: Some(1),
        ..Default::default()
    };
    let checks: Vec<(&str, RunTrace, u64)> = {
        let mut out = Vec::new();
        let mut l = QueryLedger::without_points(p.m());
        out.push((
            "gd",
            gd(&mut ProblemSource(&p), GradMode::Smoothed(5.0), &cfg, &mut l).unwrap(),
            l.total(),
        ));
        let mut l = QueryLedger::without_points(p.m());
        out.push((
            "agd",
            agd(&mut ProblemSource(&p), GradMode::Smoothed(5.0), &cfg, &mut l).unwrap(),
            l.total(),
        ));
        let mut l = QueryLedger::without_points(p.m());
        out.push((
            "sgd",
            subgradient_sgd(&mut ProblemSource(&p), &cfg, &mut l).unwrap(),
            l.total(),
        ));
        let mut l = QueryLedger::without_points(reg.m());
        out.push((
            "svrg",
            svrg(&mut ProblemSource(&reg), GradMode::Smoothed(5.0), &cfg, &mut l).unwrap(),
            l.total(),
        ));
        let mut l = QueryLedger::without_points(reg.m());
        out.push((
            "catalyst",
            catalyst_svrg(&mut ProblemSource(&reg), GradMode::Smoothed(5.0), &cfg, &mut l)
                .unwrap(),
            l.total(),
        ));
        out
    };
    for (name, trace, total) in checks {
        assert!(total <= budget, "{name}: {total} > {budget}");
        let mut prev = None;
        for pt in &trace.points {
            assert!(pt.x.norm() <= 3.0 + 1e-12, "{name}: infeasible iterate");
            if let Some(q) = prev {
                assert!(pt.queries > q, "{name}: non-increasing trace");
            }
            prev = Some(pt.queries);
        }
    }
}
