//! Full-gradient baselines: projected GD, accelerated gradient descent,
//! and the cyclic prox-point demo solver.

use crate::error::{Error, Result};
use crate::oracle::{project_ball, OracleSource, QueryLedger};
use crate::vector::Vector;

use super::{GradMode, Recorder, RunTrace, SmoothView, SolverConfig};

/// Projected gradient descent with step 1/γ (m queries per iteration).
/// On a Lipschitz class without γ it falls back to full-subgradient steps
/// B/(L√t) with running averaging, so the same entry point can play the
/// non-smooth lower-bound game.
pub fn gd<S: OracleSource + ?Sized>(
    src: &mut S,
    mode: GradMode,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let class = src.class();
    let smooth = match mode {
        GradMode::Direct => class.smooth_gamma.is_some(),
        GradMode::Smoothed(_) => true,
    };
    if !smooth {
        let l = class
            .lipschitz_l
            .ok_or(Error::MissingClassData("gamma or lipschitz_l"))?;
        let b = class
            .radius_b
            .ok_or(Error::MissingClassData("radius_b for subgradient steps"))?;
        return subgradient_full(src, l, b, cfg, ledger);
    }
    let mut view = SmoothView::new(src, mode)?;
    let gamma = view.gamma();
    let step = cfg.step_override.unwrap_or(1.0 / gamma);
    let m = view.m() as u64;
    let mut x = view.project(&view.start_point(cfg));
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &x);
    let mut iter = 0u64;
    while ledger.total() + m <= cfg.budget && iter < cfg.max_iterations.unwrap_or(u64::MAX) {
        let g = view.full_grad(&x, ledger)?;
        let mut next = x.clone();
        next.axpy(-step, &g);
        x = view.project(&next);
        iter += 1;
        rec.maybe(ledger.total(), &x);
    }
    rec.push(ledger.total(), &x);
    Ok(rec.finish())
}

/// Full-subgradient descent with steps B/(L√t) and uniform averaging.
fn subgradient_full<S: OracleSource + ?Sized>(
    src: &mut S,
    l: f64,
    b: f64,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    let m = src.m();
    let radius = src.radius();
    let start = cfg
        .start
        .clone()
        .unwrap_or_else(|| Vector::zeros(src.dim()));
    let mut x = project_ball(&start, radius);
    let mut avg = x.clone();
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &avg);
    let mut t = 0u64;
    while ledger.total() + m as u64 <= cfg.budget && t < cfg.max_iterations.unwrap_or(u64::MAX) {
        t += 1;
        let mut g = Vector::zeros(src.dim());
        for i in 0..m {
            let resp = src.query(i, &x, 1.0, ledger)?;
            g.axpy(1.0 / m as f64, &resp.gradient);
        }
        let step = cfg
            .step_override
            .unwrap_or(b / (l * (t as f64).sqrt()));
        let mut next = x.clone();
        next.axpy(-step, &g);
        x = project_ball(&next, radius);
        // running average over x_1..x_t
        let w = 1.0 / t as f64;
        avg = avg.scale(1.0 - w).add(&x.scale(w));
        rec.maybe(ledger.total(), &avg);
    }
    rec.push(ledger.total(), &avg);
    Ok(rec.finish())
}

/// Accelerated gradient descent. Uses the strongly convex momentum
/// (√κ−1)/(√κ+1) when the view has μ > 0, and the Nesterov convex
/// t-sequence otherwise; projects every step; m queries per iteration.
pub fn agd<S: OracleSource + ?Sized>(
    src: &mut S,
    mode: GradMode,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let mut view = SmoothView::new(src, mode)?;
    let gamma = view.gamma();
    let mu = view.mu();
    let m = view.m() as u64;
    let step = cfg.step_override.unwrap_or(1.0 / gamma);

    let mut x = view.project(&view.start_point(cfg));
    let mut y = x.clone();
    let mut t: f64 = 1.0;
    let momentum_sc = if mu > 0.0 {
        let rk = (gamma / mu).sqrt();
        Some((rk - 1.0) / (rk + 1.0))
    } else {
        None
    };

    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &x);
    let mut iter = 0u64;
    while ledger.total() + m <= cfg.budget && iter < cfg.max_iterations.unwrap_or(u64::MAX) {
        let g = view.full_grad(&y, ledger)?;
        let mut next = y.clone();
        next.axpy(-step, &g);
        let x_next = view.project(&next);
        let coef = match momentum_sc {
            Some(c) => c,
            None => {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let c = (t - 1.0) / t_next;
                t = t_next;
                c
            }
        };
        let mut y_next = x_next.clone();
        y_next.axpy(coef, &x_next.sub(&x));
        x = x_next;
        y = y_next;
        iter += 1;
        rec.maybe(ledger.total(), &x);
    }
    rec.push(ledger.total(), &x);
    Ok(rec.finish())
}

/// Cycles through the components applying the prox at a fixed β.
pub fn cyclic_prox_point<S: OracleSource + ?Sized>(
    src: &mut S,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let class = src.class();
    let beta = cfg
        .step_override
        .unwrap_or_else(|| match (class.lipschitz_l, class.radius_b) {
            (Some(l), Some(b)) => l / b,
            _ => 1.0,
        });
    let m = src.m();
    let mut x = match &cfg.start {
        Some(s) => s.clone(),
        None => Vector::zeros(src.dim()),
    };
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &x);
    let mut iter = 0u64;
    while ledger.total() < cfg.budget && iter < cfg.max_iterations.unwrap_or(u64::MAX) {
        let i = (iter % m as u64) as usize;
        let resp = src.query(i, &x, beta, ledger)?;
        x = resp.prox_point;
        iter += 1;
        rec.maybe(ledger.total(), &x);
    }
    rec.push(ledger.total(), &x);
    Ok(rec.finish())
}
