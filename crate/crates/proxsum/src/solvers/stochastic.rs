//! Randomized solvers: projected stochastic subgradient descent and SVRG.

use rand::Rng;

use crate::error::{Error, Result};
use crate::oracle::{project_ball, OracleSource, QueryLedger};
use crate::rng;
use crate::vector::Vector;

use super::{GradMode, Recorder, RunTrace, SmoothView, SolverConfig};

/// Stochastic subgradient descent, one query per iteration. Convex mode
/// uses steps B/(L√t) with uniform averaging; strongly convex mode uses
/// 2/(λ(t+1)) with averaging over the second half of the horizon.
pub fn subgradient_sgd<S: OracleSource + ?Sized>(
    src: &mut S,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let class = src.class();
    let l = class.lipschitz_l.ok_or(Error::MissingClassData("lipschitz_l"))?;
    let lambda = class.strong_lambda;
    let radius = class.radius_b;
    if lambda <= 0.0 && radius.is_none() {
        return Err(Error::MissingClassData("radius_b or strong_lambda"));
    }
    let m = src.m();
    let horizon = cfg
        .max_iterations
        .unwrap_or(u64::MAX)
        .min(cfg.budget.saturating_sub(ledger.total()));
    let mut generator = rng::stream(cfg.seed, 0x59d);
    let start = cfg
        .start
        .clone()
        .unwrap_or_else(|| Vector::zeros(src.dim()));
    let mut x = project_ball(&start, radius);
    let mut avg = x.clone();
    let mut avg_count = 0u64;
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &avg);
    for t in 1..=horizon {
        let i = generator.gen_range(0..m);
        let resp = src.query(i, &x, 1.0, ledger)?;
        let step = cfg.step_override.unwrap_or_else(|| {
            if lambda > 0.0 {
                2.0 / (lambda * (t as f64 + 1.0))
            } else {
                radius.unwrap() / (l * (t as f64).sqrt())
            }
        });
        let mut next = x.clone();
        next.axpy(-step, &resp.gradient);
        x = project_ball(&next, radius);
        let in_window = lambda <= 0.0 || t > horizon / 2;
        if in_window {
            avg_count += 1;
            let w = 1.0 / avg_count as f64;
            avg = avg.scale(1.0 - w).add(&x.scale(w));
        } else {
            avg = x.clone();
        }
        rec.maybe(ledger.total(), &avg);
    }
    rec.push(ledger.total(), &avg);
    Ok(rec.finish())
}

/// SVRG: anchor full gradients as control variates for stochastic steps.
///
/// Query accounting: the anchor full gradient costs m queries and its
/// per-component gradients are cached, so each inner step costs exactly
/// one fresh query. One epoch is m + epoch_length queries.
pub fn svrg<S: OracleSource + ?Sized>(
    src: &mut S,
    mode: GradMode,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let mut view = SmoothView::new(src, mode)?;
    if view.mu() <= 0.0 {
        return Err(Error::NotStronglyConvex);
    }
    let mut generator = rng::stream(cfg.seed, 0x57c6);
    let mut x = view.project(&view.start_point(cfg));
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &x);
    svrg_epochs(
        &mut view,
        &mut x,
        cfg,
        u64::MAX,
        &mut generator,
        ledger,
        &mut rec,
    )?;
    rec.push(ledger.total(), &x);
    Ok(rec.finish())
}

/// Runs up to `max_epochs` SVRG epochs in place; stops early on budget.
/// Shared by [`svrg`] and the Catalyst outer loop.
pub(super) fn svrg_epochs<S: OracleSource + ?Sized>(
    view: &mut SmoothView<'_, S>,
    x: &mut Vector,
    cfg: &SolverConfig,
    max_epochs: u64,
    generator: &mut rand_chacha::ChaCha8Rng,
    ledger: &mut QueryLedger,
    rec: &mut Recorder,
) -> Result<()> {
    let m = view.m();
    let gamma = view.gamma();
    let step = cfg.step_override.unwrap_or(1.0 / (10.0 * gamma));
    let epoch_len = cfg.epoch_length.unwrap_or(2 * m);
    let mut epoch = 0u64;
    while epoch < max_epochs && ledger.total() + m as u64 <= cfg.budget {
        // anchor: full gradient, per-component gradients cached
        let anchor = x.clone();
        let mut cache: Vec<Vector> = Vec::with_capacity(m);
        let mut full = Vector::zeros(view.dim());
        for i in 0..m {
            let g = view.grad(i, &anchor, ledger)?;
            full.axpy(1.0 / m as f64, &g);
            cache.push(g);
        }
        for _ in 0..epoch_len {
            if ledger.total() >= cfg.budget {
                break;
            }
            let i = generator.gen_range(0..m);
            let g_here = view.grad(i, x, ledger)?;
            // g_here − cache[i] + full
            let mut dir = g_here;
            dir.axpy(-1.0, &cache[i]);
            dir.axpy(1.0, &full);
            let mut next = x.clone();
            next.axpy(-step, &dir);
            *x = view.project(&next);
        }
        epoch += 1;
        rec.maybe(ledger.total(), x);
    }
    Ok(())
}
