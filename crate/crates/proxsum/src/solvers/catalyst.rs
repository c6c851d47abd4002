//! Catalyst-style outer acceleration around SVRG: each stage minimizes
//! F + (κ/2)‖x − y_t‖² from a warm start, with extrapolated anchors y_t.
//! The κ-term is analytic, so a stage's query count is exactly its inner
//! SVRG query count.

use crate::error::{Error, Result};
use crate::oracle::{OracleSource, QueryLedger};
use crate::rng;

use super::stochastic::svrg_epochs;
use super::{svrg, GradMode, Recorder, RunTrace, SmoothView, SolverConfig};

pub fn catalyst_svrg<S: OracleSource + ?Sized>(
    src: &mut S,
    mode: GradMode,
    cfg: &SolverConfig,
    ledger: &mut QueryLedger,
) -> Result<RunTrace> {
    cfg.validate()?;
    let (gamma, mu, m) = {
        let view = SmoothView::new(src, mode)?;
        (view.gamma(), view.mu(), view.m())
    };
    let kappa = cfg
        .kappa
        .unwrap_or_else(|| (gamma / m as f64 - mu).max(0.0));
    if kappa <= 0.0 {
        // no-op acceleration: a single inner call, identical to the inner solver
        return svrg(src, mode, cfg, ledger);
    }
    if mu <= 0.0 {
        return Err(Error::NotStronglyConvex);
    }

    let q = mu / (mu + kappa);
    let mut alpha = q.sqrt();
    let inner_epochs = cfg.inner_epochs.unwrap_or(4) as u64;
    let mut generator = rng::stream(cfg.seed, 0xca7a);

    let mut x = {
        let view = SmoothView::new(src, mode)?;
        view.project(&view.start_point(cfg))
    };
    let mut x_prev = x.clone();
    let mut y = x.clone();
    let mut rec = Recorder::new(cfg);
    rec.push(ledger.total(), &x);

    while ledger.total() + m as u64 <= cfg.budget {
        {
            let mut view = SmoothView::new(src, mode)?.with_shift(kappa, y.clone());
            let mut stage_rec = Recorder::new(cfg);
            svrg_epochs(
                &mut view,
                &mut x,
                cfg,
                inner_epochs,
                &mut generator,
                ledger,
                &mut stage_rec,
            )?;
        }
        // α_{t+1} solves α² = (1−α)α_t² + qα
        let a2 = alpha * alpha;
        let alpha_next = 0.5 * ((q - a2) + ((a2 - q).powi(2) + 4.0 * a2).sqrt());
        let beta_t = alpha * (1.0 - alpha) / (a2 + alpha_next);
        let mut y_next = x.clone();
        y_next.axpy(beta_t, &x.sub(&x_prev));
        x_prev = x.clone();
        y = y_next;
        alpha = alpha_next;
        rec.maybe(ledger.total(), &x);
    }
    rec.push(ledger.total(), &x);
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::least_squares_problem;
    use crate::oracle::ProblemSource;

    #[test]
    fn kappa_zero_matches_plain_svrg() {
        let p = least_squares_problem(8, 5, 0.05, 7).unwrap();
        let cfg = SolverConfig {
            budget: 2_000,
            seed: 3,
            kappa: Some(0.0),
            ..Default::default()
        };
        let mut l1 = QueryLedger::new(p.m());
        let t1 = catalyst_svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut l1).unwrap();
        let mut l2 = QueryLedger::new(p.m());
        let t2 = svrg(&mut ProblemSource(&p), GradMode::Direct, &cfg, &mut l2).unwrap();
        assert_eq!(l1.total(), l2.total());
        assert_eq!(t1.final_x(), t2.final_x());
    }
}
