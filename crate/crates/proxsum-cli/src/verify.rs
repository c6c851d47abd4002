//! Named verification suites driving the library's invariant batteries.
//! Each check reports its measured slack against the bound it must stay
//! under; `--inject-fault` perturbs one checked object as a negative
//! control for the harness itself.

use std::sync::Arc;

use anyhow::Result;
use rand::Rng;

use proxsum::brute::brute_prox_free;
use proxsum::components::{median_problem, AbsDev, Hinge, Quadratic, Regularized};
use proxsum::instances::{self, phi, psi};
use proxsum::oracle::{
    ball_prox, check_prox_optimality, ComponentOracle, QueryLedger,
};
use proxsum::resisting::{replay_verify, DetAdversary};
use proxsum::smoothing::moreau;
use proxsum::solvers::{gd, GradMode, SolverConfig};
use proxsum::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Moreau,
    DetReplay,
    RandStructure,
    ProxOracles,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Moreau => "moreau",
            Suite::DetReplay => "det_replay",
            Suite::RandStructure => "rand_structure",
            Suite::ProxOracles => "prox_oracles",
        }
    }
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "moreau" => Suite::Moreau,
            "det_replay" => Suite::DetReplay,
            "rand_structure" => Suite::RandStructure,
            "prox_oracles" => Suite::ProxOracles,
            _ => return None,
        })
    }
    pub fn all() -> [Suite; 4] {
        [
            Suite::Moreau,
            Suite::DetReplay,
            Suite::RandStructure,
            Suite::ProxOracles,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn leq(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            bound,
            pass: measured <= bound,
        }
    }
}

#[derive(Debug)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        let mut s = format!("suite {}\n", self.suite);
        for c in &self.checks {
            s.push_str(&format!(
                "  [{}] {:<58} measured {:>12.3e}  bound {:>9.1e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                c.bound
            ));
        }
        s.push_str(&format!(
            "suite {}: {}\n",
            self.suite,
            if self.ok() { "all checks passed" } else { "VIOLATIONS FOUND" }
        ));
        s
    }
}

fn lipschitz_test_components() -> Vec<(&'static str, Arc<dyn ComponentOracle>)> {
    vec![
        ("abs", Arc::new(AbsDev::new(2, 0, 1.0))),
        ("hinge", Arc::new(Hinge::new(2, 1, 0.3))),
        ("median-part", Arc::new(AbsDev::new(2, 1, -0.5))),
    ]
}

pub fn run_suite(suite: Suite, inject_fault: bool) -> Result<SuiteReport> {
    Ok(match suite {
        Suite::Moreau => moreau_suite(inject_fault),
        Suite::DetReplay => det_replay_suite(inject_fault)?,
        Suite::RandStructure => rand_structure_suite(inject_fault)?,
        Suite::ProxOracles => prox_oracles_suite(inject_fault),
    })
}

fn moreau_suite(inject_fault: bool) -> SuiteReport {
    let beta = 10.0;
    let l = 1.0;
    let mut rng = proxsum::rng::rng(0x30ea);
    let mut sandwich_lo: f64 = 0.0;
    let mut sandwich_hi: f64 = 0.0;
    let mut fd_rel: f64 = 0.0;
    let mut smooth_excess: f64 = 0.0;
    for (_, base) in lipschitz_test_components() {
        let sc = moreau(base.clone(), beta, Some(4.0)).unwrap();
        let mut prev: Option<(Vector, Vector)> = None;
        for i in 0..100 {
            let x = Vector::from_slice(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]);
            let (v, mut g) = sc.eval(&x);
            if inject_fault && i == 17 {
                g = g.scale(1.5);
            }
            let fx = base.value(&x);
            sandwich_lo = sandwich_lo.max(v - fx);
            sandwich_hi = sandwich_hi.max(fx - v - l * l / (2.0 * beta));
            for j in 0..2 {
                let h = 1e-6;
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let fd = (sc.value(&xp) - sc.value(&xm)) / (2.0 * h);
                fd_rel = fd_rel.max((fd - g[j]).abs() / g[j].abs().max(1e-3));
            }
            if let Some((px, pg)) = prev.take() {
                let lhs = g.dist(&pg);
                let rhs = beta * x.dist(&px) * (1.0 + 1e-8) + 1e-12;
                smooth_excess = smooth_excess.max(lhs - rhs);
            }
            prev = Some((x, g));
        }
    }
    // query accounting: one smoothed evaluation = one base prox record
    let sc = moreau(Arc::new(AbsDev::new(1, 0, 0.0)), 2.0, None).unwrap();
    let mut ledger = QueryLedger::new(1);
    let _ = sc.eval_counted(0, &Vector::from_slice(&[0.7]), &mut ledger);
    let accounting_err = (ledger.total() as f64 - 1.0).abs();

    SuiteReport {
        suite: "moreau",
        checks: vec![
            Check::leq("sandwich lower side f^(β) ≤ f", sandwich_lo, 1e-9),
            Check::leq("sandwich upper side f ≤ f^(β) + L²/2β", sandwich_hi, 1e-9),
            Check::leq("gradient vs central finite differences (rel)", fd_rel, 1e-5),
            Check::leq("β-smoothness sampled excess", smooth_excess, 0.0),
            Check::leq("one envelope eval = one ledger query", accounting_err, 0.0),
        ],
    }
}

fn det_replay_suite(inject_fault: bool) -> Result<SuiteReport> {
    let mut adv = DetAdversary::lipschitz(8, 1.0, 1.0, 1.0 / 40.0, None)?;
    let k = adv.k();
    let m = adv.m();
    let cfg = SolverConfig {
        budget: (6 * k * m) as u64,
        seed: 0,
        ..Default::default()
    };
    let mut ledger = QueryLedger::without_points(m);
    gd(&mut adv, GradMode::Direct, &cfg, &mut ledger)?;
    let mut game = adv.finalize()?;
    if inject_fault {
        let idx = game.transcript.len() / 2;
        game.transcript[idx].prox[0] += 1e-3;
    }
    let report = replay_verify(&game, 1000, 0x5eed);
    let (_, f_star) = game.problem.optimum().unwrap();
    let mut floor_margin = f64::MAX;
    let certified = game.floor_certified_queries();
    for (idx, e) in game.transcript.iter().enumerate() {
        if (idx as u64) < certified {
            let sub = game.problem.evaluate_sum(&e.point)? - f_star;
            floor_margin = floor_margin.min(sub - game.floor);
        }
    }
    let mut ortho_worst: f64 = 0.0;
    for (r, &closed_at) in game.round_close_queries.iter().enumerate() {
        let v = &game.basis[r + 1];
        for e in game.transcript.iter().take(closed_at as usize) {
            ortho_worst = ortho_worst.max(e.point.dot(v).abs() / e.point.norm().max(1.0));
        }
    }
    let mut rowsum_err: f64 = 0.0;
    for r in 0..game.rounds_closed {
        let sum = game.delta[r].iter().filter(|&&d| d).count();
        rowsum_err = rowsum_err.max((sum as f64 - (m / 2) as f64).abs());
    }
    Ok(SuiteReport {
        suite: "det_replay",
        checks: vec![
            Check::leq(
                "replay violations over full GD game",
                report.violations.len() as f64,
                0.0,
            ),
            Check::leq("floor margin (floor − worst subopt)", -floor_margin, 1e-9),
            Check::leq("orthogonality of v_r to earlier queries", ortho_worst, 1e-10),
            Check::leq("δ row-sum error for closed rounds", rowsum_err, 0.0),
        ],
    })
}

fn rand_structure_suite(inject_fault: bool) -> Result<SuiteReport> {
    let mut rng = proxsum::rng::rng(0x57a7);
    // ψ/φ scalar properties
    let mut phi_gap_violation: f64 = 0.0;
    let mut convexity_violation: f64 = 0.0;
    for _ in 0..100_000 {
        let c = rng.gen_range(0.0..2.0);
        let z = rng.gen_range(-5.0..5.0);
        let gap = z * z - phi(c, z).0;
        let slack = 8.0 * f64::EPSILON * (1.0 + z * z);
        phi_gap_violation = phi_gap_violation.max(-gap - slack).max(gap - 2.0 * c * c - slack);
        let z2 = rng.gen_range(-5.0..5.0);
        let mid = 0.5 * (z + z2);
        convexity_violation = convexity_violation
            .max(psi(c, mid).0 - 0.5 * (psi(c, z).0 + psi(c, z2).0) - 1e-12)
            .max(phi(c, mid).0 - 0.5 * (phi(c, z).0 + phi(c, z2).0) - 1e-12);
    }

    // span property probes across the pair variants
    let eps = 0.02;
    let insts = [
        instances::lipschitz_pairs(4, 1.0, 1.0, eps, Some(64), 3)?,
        instances::smooth_pairs(4, 1.0, 1.0, 1.0 / 2000.0, Some(64), 3)?,
        instances::smooth_sc_pairs(4, 1.0, 1e-4, 1e-6, None, Some(128), 3)?,
    ];
    let mut span_leak: f64 = 0.0;
    let mut probes = 0usize;
    for inst in &insts {
        let k = inst.params.k;
        let c = inst.params.c;
        while probes % 1000 != 999 {
            let i = rng.gen_range(0..inst.pairs());
            let t = rng.gen_range(0..=k);
            let mut x = Vector::zeros(inst.d);
            for r in 0..t {
                x.axpy(rng.gen_range(-0.3..0.3), inst.pair_vector(i, r));
            }
            for r in t..=k {
                x.axpy(rng.gen_range(-0.4..0.4) * c, inst.pair_vector(i, r));
            }
            let chk = instances::check_span_property(inst, i, &x, t, rng.gen_range(0.5..5.0))?;
            if chk.precondition_ok {
                for v in chk.grad_leak.iter().chain(chk.prox_leak.iter()) {
                    span_leak = span_leak.max(*v);
                }
            }
            probes += 1;
        }
        probes += 1;
    }
    if inject_fault {
        span_leak += 1e-6;
    }

    // per-pair floor of the non-smooth pairs at orthogonal probes
    let inst = &insts[0];
    let mut floor_margin = f64::MAX;
    for i in 0..inst.pairs() {
        for _ in 0..30 {
            let mut x = Vector::zeros(inst.d);
            for e in x.as_mut_slice() {
                *e = rng.gen_range(-0.3..0.3);
            }
            let vk = inst.pair_vector(i, inst.params.k);
            let ip = x.dot(vk);
            x.axpy(-ip, vk);
            let gap = inst.pair_suboptimality(i, &x)?;
            floor_margin = floor_margin.min(gap - 2.0 * eps);
        }
    }

    // parameter formulas
    let p_err = {
        let i1 = instances::lipschitz_pairs(4, 1.0, 1.0, 0.02, Some(16), 1)?;
        let e1 = (i1.params.b - (1.0f64 / 6.0).sqrt()).abs()
            + (i1.params.c - 0.02 / 2f64.sqrt()).abs()
            + (i1.params.k as f64 - 2.0).abs();
        let i2 = instances::smooth_pairs(4, 1.0, 1.0, 1.0 / 2000.0, Some(16), 1)?;
        let e2 = (i2.params.a - 0.5f64.sqrt()).abs() + (i2.params.c - 0.004f64.sqrt()).abs();
        let i3 = instances::linear_instance(16, 0.01, None, 1)?;
        e1 + e2 + (i3.params.big_c - 0.5).abs()
    };

    Ok(SuiteReport {
        suite: "rand_structure",
        checks: vec![
            Check::leq("φ sandwich 0 ≤ z²−φ_c(z) ≤ 2c² (ulp slack)", phi_gap_violation, 0.0),
            Check::leq("ψ/φ midpoint convexity violation", convexity_violation, 0.0),
            Check::leq("span-property leakage over probes", span_leak, 1e-12),
            Check::leq("per-pair floor shortfall vs 2ε", -floor_margin, 0.0),
            Check::leq("construction parameter formulas", p_err, 1e-12),
        ],
    })
}

fn prox_oracles_suite(inject_fault: bool) -> SuiteReport {
    let mut rng = proxsum::rng::rng(0x9aac);
    let comps: Vec<Arc<dyn ComponentOracle>> = vec![
        Arc::new(Quadratic::new(3, Vector::from_slice(&[1.0, 0.0, -1.0]), 2.0)),
        Arc::new(AbsDev::new(3, 2, 0.5)),
        Arc::new(Hinge::new(3, 0, 1.0)),
        Arc::new(Regularized::new(Arc::new(AbsDev::new(3, 1, -0.2)), 0.3)),
    ];
    let mut residual_worst: f64 = 0.0;
    let mut feas_worst: f64 = 0.0;
    for comp in &comps {
        for _ in 0..100 {
            let mut x = Vector::zeros(3);
            for v in x.as_mut_slice() {
                *v = rng.gen_range(-2.5..2.5);
            }
            let beta = rng.gen_range(0.3..8.0);
            let mut u = ball_prox(comp.as_ref(), &x, beta, Some(2.0));
            if inject_fault && residual_worst == 0.0 {
                u[0] += 1e-3;
            }
            residual_worst =
                residual_worst.max(check_prox_optimality(comp.as_ref(), &x, beta, &u, Some(2.0)));
            feas_worst = feas_worst.max(u.norm() - 2.0);
        }
    }
    // brute-force agreement on the non-smooth median components
    let p = median_problem(&[0.0, 1.0, 2.0], 3.0).unwrap();
    let mut brute_dist: f64 = 0.0;
    for comp in p.components() {
        for _ in 0..20 {
            let x = Vector::from_slice(&[rng.gen_range(-3.0..3.0)]);
            let beta = rng.gen_range(0.5..5.0);
            let fast = comp.prox_free(&x, beta);
            let brute = brute_prox_free(comp.as_ref(), &x, beta, 10_000, 0.0);
            brute_dist = brute_dist.max(fast.dist(&brute.point) - brute.residual / beta);
        }
    }
    // high-β displacement bound on a Lipschitz component
    let c = AbsDev::new(2, 0, 0.25);
    let beta = 1e8;
    let x = Vector::from_slice(&[0.4, -0.9]);
    let u = ball_prox(&c, &x, beta, Some(5.0));
    let displacement_excess = u.dist(&x) - (1.0 / beta + 1e-9);

    SuiteReport {
        suite: "prox_oracles",
        checks: vec![
            Check::leq("prox optimality residual", residual_worst, 1e-9),
            Check::leq("prox feasibility excess over B", feas_worst, 1e-9),
            Check::leq("prox vs brute-force inner solver", brute_dist, 1e-8),
            Check::leq("β→∞ displacement bound L/β", displacement_excess, 0.0),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass_clean() {
        for suite in Suite::all() {
            let report = run_suite(suite, false).unwrap();
            assert!(report.ok(), "{}", report.render());
        }
    }

    #[test]
    fn injected_faults_are_detected() {
        for suite in Suite::all() {
            let report = run_suite(suite, true).unwrap();
            assert!(!report.ok(), "suite {} missed the injected fault", report.suite);
        }
    }
}
