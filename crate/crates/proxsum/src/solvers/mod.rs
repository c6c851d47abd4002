//! Upper-bound algorithms: projected (sub)gradient descent, accelerated
//! gradient descent, SGD, SVRG, Catalyst-style acceleration, the
//! regularization reduction, and the smoothing pipelines that compose them.
//!
//! Solvers are written against [`OracleSource`] so the same loops optimize
//! static problems and play the resisting-oracle game. Gradients reach the
//! solver through a [`SmoothView`], which is either the component gradient
//! itself or the Moreau-envelope gradient β(x − prox) at a fixed β.

mod catalyst;
mod first_order;
mod pipeline;
mod stochastic;

pub use catalyst::catalyst_svrg;
pub use first_order::{agd, cyclic_prox_point, gd};
pub use pipeline::{adapt_smooth, regularize_reduce, smoothed_minimize, SmoothedMode, StageInner};
pub use stochastic::{subgradient_sgd, svrg};

use crate::error::{Error, Result};
use crate::oracle::{project_ball, OracleSource, QueryLedger};
use crate::smoothing::envelope_modulus;
use crate::vector::Vector;

/// Knobs shared by every solver. `budget` caps ledger-counted oracle
/// queries; a solver never exceeds it.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub budget: u64,
    pub seed: u64,
    /// Step-size override (meaning depends on the solver).
    pub step_override: Option<f64>,
    /// SVRG inner-loop length; default 2m.
    pub epoch_length: Option<usize>,
    /// Catalyst regularization; default max(0, γ/m − λ).
    pub kappa: Option<f64>,
    /// SVRG epochs per Catalyst stage; default 4.
    pub inner_epochs: Option<usize>,
    pub max_iterations: Option<u64>,
    /// Trace cadence in queries; default ⌈budget/200⌉.
    pub record_every: Option<u64>,
    /// Start point; default 0 (feasible for every domain here).
    pub start: Option<Vector>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            budget: 1_000_000,
            seed: 0,
            step_override: None,
            epoch_length: None,
            kappa: None,
            inner_epochs: None,
            max_iterations: None,
            record_every: None,
            start: None,
        }
    }
}

impl SolverConfig {
    pub fn with_budget(budget: u64) -> Self {
        SolverConfig {
            budget,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidParameter("budget must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub queries: u64,
    pub x: Vector,
    pub suboptimality: Option<f64>,
}

/// Iterate history against cumulative query count.
#[derive(Debug, Clone, Default)]
pub struct RunTrace {
    pub points: Vec<TracePoint>,
}

impl RunTrace {
    pub fn final_x(&self) -> Option<&Vector> {
        self.points.last().map(|p| &p.x)
    }

    pub fn total_queries(&self) -> u64 {
        self.points.last().map_or(0, |p| p.queries)
    }

    /// Fills the suboptimality column with F(x) − f_star (out of band).
    pub fn measure<F: Fn(&Vector) -> f64>(&mut self, f: F, f_star: f64) {
        for p in &mut self.points {
            p.suboptimality = Some(f(&p.x) - f_star);
        }
    }

    /// First query count at which the measured suboptimality is ≤ eps.
    pub fn queries_to(&self, eps: f64) -> Option<u64> {
        self.points
            .iter()
            .find(|p| p.suboptimality.map_or(false, |s| s <= eps))
            .map(|p| p.queries)
    }
}

pub(crate) struct Recorder {
    points: Vec<TracePoint>,
    every: u64,
}

impl Recorder {
    pub fn new(cfg: &SolverConfig) -> Self {
        let every = cfg.record_every.unwrap_or_else(|| {
            if cfg.budget == u64::MAX {
                1
            } else {
                (cfg.budget / 200).max(1)
            }
        });
        Recorder {
            points: Vec::new(),
            every,
        }
    }

    /// Keeps cumulative queries strictly increasing: a new point at the
    /// same count replaces the previous one.
    pub fn push(&mut self, queries: u64, x: &Vector) {
        match self.points.last_mut() {
            Some(last) if last.queries == queries => last.x = x.clone(),
            Some(last) if last.queries > queries => {}
            _ => self.points.push(TracePoint {
                queries,
                x: x.clone(),
                suboptimality: None,
            }),
        }
    }

    pub fn maybe(&mut self, queries: u64, x: &Vector) {
        let due = self
            .points
            .last()
            .map_or(true, |p| queries >= p.queries + self.every);
        if due {
            self.push(queries, x);
        }
    }

    pub fn finish(self) -> RunTrace {
        RunTrace {
            points: self.points,
        }
    }
}

/// How a solver reads gradients out of the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradMode {
    /// The component (sub)gradient field of the h_F triple.
    Direct,
    /// The Moreau-envelope gradient β(x − prox(x, β)).
    Smoothed(f64),
}

/// β recorded for direct-mode queries (the triple is returned whole; only
/// the gradient field is used).
const DIRECT_BETA: f64 = 1.0;

/// A smooth objective surface over an oracle source: gradients per
/// component, plus (γ, μ) for step sizes, plus an optional Catalyst shift
/// (κ/2)‖x − y‖² that is analytic and costs no queries.
pub struct SmoothView<'a, S: OracleSource + ?Sized> {
    src: &'a mut S,
    mode: GradMode,
    shift: Option<(f64, Vector)>,
}

impl<'a, S: OracleSource + ?Sized> SmoothView<'a, S> {
    pub fn new(src: &'a mut S, mode: GradMode) -> Result<Self> {
        if let GradMode::Direct = mode {
            if src.class().smooth_gamma.is_none() {
                return Err(Error::MissingClassData(
                    "smooth_gamma required for direct gradient steps",
                ));
            }
        }
        Ok(SmoothView {
            src,
            mode,
            shift: None,
        })
    }

    pub fn with_shift(mut self, kappa: f64, center: Vector) -> Self {
        self.shift = Some((kappa, center));
        self
    }

    pub fn m(&self) -> usize {
        self.src.m()
    }

    pub fn dim(&self) -> usize {
        self.src.dim()
    }

    pub fn radius(&self) -> Option<f64> {
        self.src.radius()
    }

    pub fn gamma(&self) -> f64 {
        let base = match self.mode {
            GradMode::Direct => self.src.class().smooth_gamma.unwrap_or(f64::INFINITY),
            GradMode::Smoothed(beta) => beta,
        };
        base + self.shift.as_ref().map_or(0.0, |(k, _)| *k)
    }

    pub fn mu(&self) -> f64 {
        let lambda = self.src.class().strong_lambda;
        let base = match self.mode {
            GradMode::Direct => lambda,
            GradMode::Smoothed(beta) => envelope_modulus(lambda, beta),
        };
        base + self.shift.as_ref().map_or(0.0, |(k, _)| *k)
    }

    pub fn grad(&mut self, i: usize, x: &Vector, ledger: &mut QueryLedger) -> Result<Vector> {
        let mut g = match self.mode {
            GradMode::Direct => self.src.query(i, x, DIRECT_BETA, ledger)?.gradient,
            GradMode::Smoothed(beta) => {
                let resp = self.src.query(i, x, beta, ledger)?;
                x.sub(&resp.prox_point).scale(beta)
            }
        };
        if let Some((kappa, center)) = &self.shift {
            g.axpy(*kappa, &x.sub(center));
        }
        Ok(g)
    }

    pub fn full_grad(&mut self, x: &Vector, ledger: &mut QueryLedger) -> Result<Vector> {
        let m = self.m();
        let mut g = Vector::zeros(self.dim());
        for i in 0..m {
            g.axpy(1.0 / m as f64, &self.grad(i, x, ledger)?);
        }
        Ok(g)
    }

    pub fn project(&self, x: &Vector) -> Vector {
        project_ball(x, self.radius())
    }

    pub fn start_point(&self, cfg: &SolverConfig) -> Vector {
        cfg.start
            .clone()
            .unwrap_or_else(|| Vector::zeros(self.dim()))
    }
}
