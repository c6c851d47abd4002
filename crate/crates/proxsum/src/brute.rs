//! Brute-force prox solver used as an independent oracle by the
//! verification suites.
//!
//! The search only evaluates the component's value and subgradient — never
//! its structured prox. Three ingredients cover the failure modes of each
//! other:
//!
//! - restarted Polyak steps (target = best − Δ, halving Δ when progress
//!   stalls) converge fast to kink-located minimizers, where value
//!   information is sharp;
//! - plain gradient steps contract inside smooth valleys, where value
//!   comparisons saturate at √ε_machine but gradients stay informative;
//! - an alternation of the two re-snaps kink coordinates after each
//!   gradient move, handling mixed minimizers.
//!
//! The candidate with the smallest prox-optimality residual wins; for the
//! β-strongly convex objective h(u) = f(u) + (β/2)‖u − x‖² the residual
//! divided by β bounds the distance to the exact prox.

use crate::oracle::{ball_prox, check_prox_optimality, ComponentOracle};
use crate::vector::Vector;

pub struct BruteResult {
    pub point: Vector,
    /// Residual of the optimality condition at `point`; the distance to
    /// the exact prox is at most residual/β.
    pub residual: f64,
}

/// Unconstrained brute prox. `smooth_hint` upper-bounds the component's
/// smoothness where it is differentiable (0 for piecewise-linear parts).
pub fn brute_prox_free(
    comp: &dyn ComponentOracle,
    x: &Vector,
    beta: f64,
    iters: usize,
    smooth_hint: f64,
) -> BruteResult {
    let h = |u: &Vector| comp.value(u) + 0.5 * beta * u.dist(x).powi(2);
    let grad = |u: &Vector| {
        let mut g = comp.subgradient(u);
        g.axpy(beta, &u.sub(x));
        g
    };
    let residual = |u: &Vector| check_prox_optimality(comp, x, beta, u, None);

    let mut u = x.clone();
    let mut best_v = h(&u);
    let mut best_u = u.clone();

    // restarted Polyak: aim at best − Δ, halve Δ when a burst stalls
    let g0 = grad(&u);
    let mut delta = (g0.dot(&g0) / (2.0 * beta)).max(1e-12 * (1.0 + best_v.abs()));
    let bursts = (iters / 60).max(40);
    for _ in 0..bursts {
        let target = best_v - delta;
        let before = best_v;
        for _ in 0..60 {
            let g = grad(&u);
            let gn2 = g.dot(&g);
            if gn2 == 0.0 {
                break;
            }
            let hv = h(&u);
            if hv < best_v {
                best_v = hv;
                best_u = u.clone();
            }
            let step = ((hv - target) / gn2).max(0.0);
            u.axpy(-step, &g);
        }
        if best_v > before - 0.5 * delta {
            delta *= 0.5;
            u = best_u.clone();
        }
        if delta <= 1e-18 * (1.0 + best_v.abs()) {
            break;
        }
    }

    let mut candidates: Vec<Vector> = vec![best_u.clone()];

    // alternation polish: one gradient step for the smooth directions,
    // then a few sharp Polyak steps to pull kink coordinates back
    let gstep = 1.0 / (beta + smooth_hint.max(0.0));
    u = best_u.clone();
    let mut lb = best_v - residual(&best_u).powi(2) / (2.0 * beta);
    for macro_iter in 0..120 {
        let g = grad(&u);
        u.axpy(-gstep, &g);
        for _ in 0..6 {
            let g = grad(&u);
            let gn2 = g.dot(&g);
            if gn2 == 0.0 {
                break;
            }
            let hv = h(&u);
            let step = ((hv - lb) / gn2).max(0.0);
            u.axpy(-step, &g);
        }
        if macro_iter % 20 == 19 {
            candidates.push(u.clone());
            let hv = h(&u);
            lb = lb.max(hv - residual(&u).powi(2) / (2.0 * beta));
        }
    }
    candidates.push(u.clone());

    let mut best: Option<(Vector, f64)> = None;
    for c in candidates {
        let res = residual(&c);
        match &best {
            None => best = Some((c, res)),
            Some((_, r)) if res < *r => best = Some((c, res)),
            _ => {}
        }
    }
    let (mut point, mut point_res) = best.unwrap();

    // Newton-like endgame on the minimal-norm subdifferential element: the
    // box QP absorbs kink directions, so the residual vector points down
    // the smooth part of the valley and beats the value-resolution wall
    // that limits the phases above. Steps backtrack on the residual.
    u = point.clone();
    let mut res_u = point_res;
    let mut step = 1.0 / (beta + smooth_hint.max(0.0));
    for _ in 0..120 {
        if res_u == 0.0 {
            break;
        }
        let (_, rv) = crate::oracle::prox_residual_vector(comp, x, beta, &u, None);
        let mut next = u.clone();
        next.axpy(-step, &rv);
        let res_next = residual(&next);
        if res_next < res_u {
            u = next;
            res_u = res_next;
            step *= 1.5;
        } else {
            step *= 0.25;
            if step * rv.norm() < 1e-17 * (1.0 + u.norm()) {
                break;
            }
        }
        step = step.min(1.0 / (beta + smooth_hint.max(0.0)));
        if res_u < point_res {
            point = u.clone();
            point_res = res_u;
        }
    }
    BruteResult {
        point,
        residual: point_res,
    }
}

struct BruteFree<'a> {
    inner: &'a dyn ComponentOracle,
    iters: usize,
    smooth_hint: f64,
}

impl ComponentOracle for BruteFree<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        self.inner.subgradient(x)
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        brute_prox_free(self.inner, x, beta, self.iters, self.smooth_hint).point
    }
}

/// Domain-constrained brute prox: the same Lagrangian bisection as the
/// production path, but over brute free solves.
pub fn brute_prox(
    comp: &dyn ComponentOracle,
    x: &Vector,
    beta: f64,
    radius: Option<f64>,
    iters: usize,
    smooth_hint: f64,
) -> Vector {
    let wrapper = BruteFree {
        inner: comp,
        iters,
        smooth_hint,
    };
    ball_prox(&wrapper, x, beta, radius)
}
