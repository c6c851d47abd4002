//! The deterministic resisting oracle.
//!
//! It answers h_F queries from truncated functions that depend only on
//! rounds already closed, so every answer stays consistent with a final
//! hard instance that is assembled online: a "round" ends when ⌈m/2⌉
//! distinct components have been queried, at which point the indicator row
//! δ_{·,t} is fixed (δ = 1 exactly for the components not queried that
//! round) and a fresh basis vector v_t is drawn orthogonal to every point
//! queried so far. Until enough rounds have closed, every point the
//! algorithm has produced sits above a certified suboptimality floor.

mod chain;
mod span;

pub use chain::{abs_chain_prox_coords, AbsChain, QuadChain};
pub use span::KnowledgeSpan;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::components::Regularized;
use crate::error::{Error, Result};
use crate::oracle::{
    ball_prox, ComponentOracle, FunctionClass, OracleResponse, OracleSource, Problem, QueryLedger,
};
use crate::vector::Vector;

use chain::{chain_point, quad_chain_argmin};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetVariant {
    Lipschitz,
    LipschitzSc,
    Smooth,
    SmoothSc,
}

/// One oracle answer as issued, kept for consistency replay.
#[derive(Debug, Clone)]
pub struct TranscriptEntry {
    pub component: usize,
    pub beta: f64,
    pub point: Vector,
    pub value: f64,
    pub gradient: Vector,
    pub prox: Vector,
}

/// Construction constants, frozen at game start.
#[derive(Debug, Clone)]
pub struct DetParams {
    pub variant: DetVariant,
    pub m: usize,
    pub k: usize,
    pub l: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub radius: f64,
    pub eps: f64,
    pub eps0: f64,
    /// b = 1/√(k+1) (Lipschitz head target, unit scale)
    pub b_norm: f64,
    /// a = √(3/(k+1)) (smooth head coefficient, unit scale)
    pub a_norm: f64,
    pub cap_q: f64,
    pub q: f64,
    pub zeta: f64,
    /// smooth-sc head coefficient, calibrated so F(0) − F* = ε₀
    pub cap_c: f64,
}

pub struct DetAdversary {
    params: DetParams,
    class: FunctionClass,
    dim: usize,
    basis: Arc<Vec<Vector>>,
    span: KnowledgeSpan,
    /// δ rows for closed rounds (row r−1 is round r)
    delta: Vec<Vec<bool>>,
    round_components: BTreeSet<usize>,
    /// transcript length at which each round closed
    round_close_queries: Vec<u64>,
    transcript: Vec<TranscriptEntry>,
    pub warnings: Vec<String>,
}

fn ceil_half(m: usize) -> usize {
    m.div_ceil(2)
}

/// Tight Lipschitz constant of the unit-scale chain component, maximized
/// over sign patterns of its overlapping difference terms:
/// ‖g‖² ≤ (1/√2 + 1/(2√k))² + (k−1)/k + 1/(4k). This exceeds 1 by a small
/// constant; the class metadata reports it exactly so the certificate
/// invariant holds, while the construction (and its floor) keeps the
/// customary unit normalization.
fn abs_chain_lipschitz(k: usize) -> f64 {
    let w0 = 1.0 / 2f64.sqrt();
    let w = 1.0 / (2.0 * (k as f64).sqrt());
    ((w0 + w).powi(2) + (k as f64 - 1.0) / k as f64 + 1.0 / (4.0 * k as f64)).sqrt()
}

impl DetAdversary {
    /// Non-smooth, non-strongly-convex variant on the B-ball.
    pub fn lipschitz(m: usize, l: f64, b: f64, eps: f64, dim: Option<usize>) -> Result<Self> {
        Self::check_common(m, eps)?;
        if !(l > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter("need positive L and B".into()));
        }
        let mut warnings = Vec::new();
        let eps_n = eps / (l * b);
        if eps_n >= 1.0 / 12.0 {
            warnings.push(format!(
                "eps = {eps} is outside the theorem range eps < LB/12; the floor may be vacuous"
            ));
        }
        let k = ((1.0 / (12.0 * eps_n)).floor() as usize).max(1);
        let b_norm = 1.0 / ((k + 1) as f64).sqrt();
        let dim = dim.unwrap_or_else(|| (m as f64 / eps_n).ceil() as usize + k + 1);
        let params = DetParams {
            variant: DetVariant::Lipschitz,
            m,
            k,
            l,
            gamma: 0.0,
            lambda: 0.0,
            radius: b,
            eps,
            eps0: 0.0,
            b_norm,
            a_norm: 0.0,
            cap_q: 0.0,
            q: 0.0,
            zeta: 0.0,
            cap_c: 0.0,
        };
        let class = FunctionClass::lipschitz(l * abs_chain_lipschitz(k), Some(b));
        Self::build(params, class, dim, warnings)
    }

    /// Strongly convex Lipschitz variant: the Lipschitz construction plus
    /// the regularizer (λ/2)‖x‖², instantiated on the ball B = √(2ε/λ)
    /// so that λB²/2 = ε and the reduction is exact.
    pub fn lipschitz_sc(
        m: usize,
        l: f64,
        lambda: f64,
        eps: f64,
        dim: Option<usize>,
    ) -> Result<Self> {
        Self::check_common(m, eps)?;
        if !(l > 0.0 && lambda > 0.0) {
            return Err(Error::InvalidParameter("need positive L and lambda".into()));
        }
        let mut warnings = Vec::new();
        if eps >= l * l / (288.0 * lambda) {
            warnings.push(format!(
                "eps = {eps} is outside the theorem range eps < L²/(288λ)"
            ));
        }
        let b = (2.0 * eps / lambda).sqrt();
        let eps_base = 2.0 * eps;
        let eps_n = eps_base / (l * b);
        let k = ((1.0 / (12.0 * eps_n)).floor() as usize).max(1);
        let b_norm = 1.0 / ((k + 1) as f64).sqrt();
        let dim = dim.unwrap_or_else(|| (m as f64 / eps_n).ceil() as usize + k + 1);
        let params = DetParams {
            variant: DetVariant::LipschitzSc,
            m,
            k,
            l,
            gamma: 0.0,
            lambda,
            radius: b,
            eps,
            eps0: 0.0,
            b_norm,
            a_norm: 0.0,
            cap_q: 0.0,
            q: 0.0,
            zeta: 0.0,
            cap_c: 0.0,
        };
        let class =
            FunctionClass::lipschitz(l * abs_chain_lipschitz(k) + lambda * b, Some(b))
                .with_lambda(lambda);
        Self::build(params, class, dim, warnings)
    }

    /// Smooth, non-strongly-convex variant on the B-ball.
    pub fn smooth(m: usize, gamma: f64, b: f64, eps: f64, dim: Option<usize>) -> Result<Self> {
        Self::check_common(m, eps)?;
        if !(gamma > 0.0 && b > 0.0) {
            return Err(Error::InvalidParameter("need positive gamma and B".into()));
        }
        let mut warnings = Vec::new();
        let eps_n = eps / (gamma * b * b);
        if eps_n >= 1.0 / 128.0 {
            warnings.push(format!(
                "eps = {eps} is outside the range eps < γB²/128; the floor may be vacuous"
            ));
        }
        let k = ((1.0 / (32.0 * eps_n).sqrt()).floor() as usize).max(2);
        let a_norm = (3.0 / (k + 1) as f64).sqrt();
        let dim = dim.unwrap_or_else(|| (m as f64 / eps_n.sqrt()).ceil() as usize + k + 1);
        let params = DetParams {
            variant: DetVariant::Smooth,
            m,
            k,
            l: 0.0,
            gamma,
            lambda: 0.0,
            radius: b,
            eps,
            eps0: 0.0,
            b_norm: 0.0,
            a_norm,
            cap_q: 0.0,
            q: 0.0,
            zeta: 1.0,
            cap_c: 0.0,
        };
        let class = FunctionClass::smooth(gamma, Some(b));
        Self::build(params, class, dim, warnings)
    }

    /// Smooth strongly convex variant (unconstrained domain), with the
    /// head coefficient C calibrated so that F(0) − F* = ε₀.
    pub fn smooth_sc(
        m: usize,
        gamma: f64,
        lambda: f64,
        eps: f64,
        eps0: Option<f64>,
        dim: Option<usize>,
    ) -> Result<Self> {
        Self::check_common(m, eps)?;
        if !(gamma > 0.0 && lambda > 0.0 && gamma > lambda) {
            return Err(Error::InvalidParameter(
                "need positive gamma > lambda".into(),
            ));
        }
        let mut warnings = Vec::new();
        let lam_n = lambda / gamma;
        if gamma / lambda <= 73.0 {
            warnings.push(format!(
                "condition number γ/λ = {} is outside the theorem range (> 73)",
                gamma / lambda
            ));
        }
        let eps0 = eps0.unwrap_or(30.0 * gamma * eps / lambda);
        if eps0 <= 3.0 * gamma * eps / lambda {
            warnings.push(format!(
                "eps0 = {eps0} is outside the theorem range eps0 > 3γε/λ"
            ));
        }
        let half = (m / 2) as f64;
        let cap_q = half / m as f64 * (1.0 / lam_n - 1.0) + 1.0;
        let rq = cap_q.sqrt();
        let q = (rq - 1.0) / (rq + 1.0);
        let zeta = 1.0 - q;
        let cap_c = (8.0 * eps0 / lambda).sqrt() / (rq - 1.0);
        let t_max = (((rq - 1.0) / 4.0) * (eps0 / (2.0 * rq * eps)).ln())
            .floor()
            .max(1.0) as usize;
        // k + 1 = ⌈t_max − 1/(2 ln q)⌉ (ln q < 0, so the offset is positive)
        let k = ((t_max as f64 - 1.0 / (2.0 * q.ln())).ceil() as usize).saturating_sub(1);
        let k = k.max(t_max).max(2);
        let dim = dim.unwrap_or(2 * m * (k + 2) + k + 2);
        let params = DetParams {
            variant: DetVariant::SmoothSc,
            m,
            k,
            l: 0.0,
            gamma,
            lambda,
            radius: f64::INFINITY,
            eps,
            eps0,
            b_norm: 0.0,
            a_norm: 0.0,
            cap_q,
            q,
            zeta,
            cap_c,
        };
        let class = FunctionClass::smooth(gamma, None).with_lambda(lambda);
        Self::build(params, class, dim, warnings)
    }

    fn check_common(m: usize, eps: f64) -> Result<()> {
        if m < 2 {
            return Err(Error::InvalidParameter("need m >= 2".into()));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter("need eps > 0".into()));
        }
        Ok(())
    }

    fn build(
        params: DetParams,
        class: FunctionClass,
        dim: usize,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let needed = params.k + 2;
        if dim < needed {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} below structural minimum {needed}"
            )));
        }
        let mut span = KnowledgeSpan::new(dim);
        let v0 = span.fresh_direction()?;
        Ok(DetAdversary {
            params,
            class,
            dim,
            basis: Arc::new(vec![v0]),
            span,
            delta: Vec::new(),
            round_components: BTreeSet::new(),
            round_close_queries: Vec::new(),
            transcript: Vec::new(),
            warnings,
        })
    }

    pub fn params(&self) -> &DetParams {
        &self.params
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Current round, 1-indexed; stays at k + 1 once every δ row exists
    /// (the endgame, where answers come from the finalized functions).
    pub fn round(&self) -> usize {
        (self.delta.len() + 1).min(self.params.k + 1)
    }

    pub fn closed_rounds(&self) -> usize {
        self.delta.len()
    }

    pub fn queries_answered(&self) -> u64 {
        self.transcript.len() as u64
    }

    pub fn round_close_queries(&self) -> &[u64] {
        &self.round_close_queries
    }

    fn endgame(&self) -> bool {
        self.delta.len() >= self.params.k
    }

    fn ball(&self) -> Option<f64> {
        if self.params.radius.is_finite() {
            Some(self.params.radius)
        } else {
            None
        }
    }

    /// Number of closed rounds after which the floor guarantee lapses.
    pub fn termination_round(&self) -> usize {
        termination_round(&self.params)
    }

    /// Certified lower bound on F(x) − F* valid for every point generated
    /// so far, while `closed_rounds() < termination_round()`.
    pub fn theoretical_floor(&self) -> f64 {
        let p = &self.params;
        match p.variant {
            DetVariant::SmoothSc => {
                let t = self.delta.len() as i32;
                let rq = p.cap_q.sqrt();
                p.eps0 * (p.q.powi(2 * t) - p.q.powi(2 * p.k as i32 + 2)) / rq
            }
            _ => static_floor(p),
        }
    }

    /// Lipschitz head weight, head target, and per-edge weight (L-scaled).
    fn abs_weights(&self) -> (f64, f64, f64) {
        let p = &self.params;
        (
            p.l / 2f64.sqrt(),
            p.b_norm * p.radius,
            p.l / (2.0 * (p.k as f64).sqrt()),
        )
    }

    /// Smooth quadratic coefficient and head linear term (already scaled).
    fn quad_scales(&self) -> (f64, f64) {
        let p = &self.params;
        match p.variant {
            DetVariant::Smooth => (p.gamma / 8.0, p.a_norm * p.radius),
            DetVariant::SmoothSc => ((p.gamma - p.lambda) / 8.0, p.cap_c),
            _ => unreachable!(),
        }
    }

    fn assemble(&self, i: usize, len: usize, with_tail: bool) -> Arc<dyn ComponentOracle> {
        let p = &self.params;
        // δ_{i,r} for 1-indexed round r; unknown rounds answer as 0
        let gate = |r: usize| -> bool { self.delta.get(r - 1).map_or(false, |row| row[i]) };
        match p.variant {
            DetVariant::Lipschitz | DetVariant::LipschitzSc => {
                let (head_w, head_b, edge) = self.abs_weights();
                let edge_w: Vec<f64> = (1..len)
                    .map(|r| if gate(r) { edge } else { 0.0 })
                    .collect();
                let base = AbsChain::new(self.basis.clone(), len, head_w, head_b, edge_w);
                if p.lambda > 0.0 {
                    Arc::new(Regularized::new(Arc::new(base), p.lambda))
                } else {
                    Arc::new(base)
                }
            }
            DetVariant::Smooth | DetVariant::SmoothSc => {
                let (coeff, a) = self.quad_scales();
                let head = if len >= 2 && gate(1) { 1.0 } else { 0.0 };
                let edge: Vec<f64> = (1..len)
                    .map(|r| if gate(r) { 1.0 } else { 0.0 })
                    .collect();
                let tail = if with_tail && gate(p.k) { p.zeta } else { 0.0 };
                let base = QuadChain::new(self.basis.clone(), len, coeff, head, a, edge, tail);
                if p.lambda > 0.0 {
                    Arc::new(Regularized::new(Arc::new(base), p.lambda))
                } else {
                    Arc::new(base)
                }
            }
        }
    }

    /// The component the adversary currently answers for index i.
    fn current_component(&self, i: usize) -> Arc<dyn ComponentOracle> {
        if self.endgame() {
            self.assemble(i, self.params.k + 1, true)
        } else {
            self.assemble(i, self.delta.len() + 1, false)
        }
    }

    /// Answers one query from the current truncations, recording it and
    /// closing the round when it brings the ⌈m/2⌉-th distinct component.
    pub fn answer(&mut self, i: usize, x: &Vector, beta: f64) -> Result<OracleResponse> {
        let p = &self.params;
        if i >= p.m {
            return Err(Error::ComponentOutOfRange { index: i, m: p.m });
        }
        if !(beta > 0.0) {
            return Err(Error::NonPositiveBeta(beta));
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let comp = self.current_component(i);
        let resp = OracleResponse {
            value: comp.value(x),
            gradient: comp.subgradient(x),
            prox_point: ball_prox(comp.as_ref(), x, beta, self.ball()),
        };
        self.transcript.push(TranscriptEntry {
            component: i,
            beta,
            point: x.clone(),
            value: resp.value,
            gradient: resp.gradient.clone(),
            prox: resp.prox_point.clone(),
        });
        if !self.endgame() {
            self.span.absorb(x);
            self.round_components.insert(i);
            if self.round_components.len() == ceil_half(self.params.m) {
                self.close_round()?;
            }
        }
        Ok(resp)
    }

    fn close_round(&mut self) -> Result<()> {
        let m = self.params.m;
        let row: Vec<bool> = (0..m)
            .map(|i| !self.round_components.contains(&i))
            .collect();
        self.delta.push(row);
        self.round_components.clear();
        self.round_close_queries.push(self.transcript.len() as u64);
        let v = self.span.fresh_direction()?;
        Arc::make_mut(&mut self.basis).push(v);
        Ok(())
    }

    /// Freezes the game into a static problem with its exact optimum.
    /// May be called mid-game: the open round keeps δ = 1 for every
    /// component it did not touch, and never-reached rounds assign δ = 1
    /// to the first ⌊m/2⌋ components.
    pub fn finalize(mut self) -> Result<FinalizedGame> {
        let p = self.params.clone();
        let m = p.m;
        let mut open_round_pending = !self.round_components.is_empty();
        while self.delta.len() < p.k {
            let row: Vec<bool> = if open_round_pending {
                open_round_pending = false;
                (0..m)
                    .map(|i| !self.round_components.contains(&i))
                    .collect()
            } else {
                (0..m).map(|i| i < m / 2).collect()
            };
            self.delta.push(row);
        }
        self.round_components.clear();
        while self.basis.len() < p.k + 1 {
            let v = self.span.fresh_direction()?;
            Arc::make_mut(&mut self.basis).push(v);
        }

        let components: Vec<Arc<dyn ComponentOracle>> =
            (0..m).map(|i| self.assemble(i, p.k + 1, true)).collect();
        let problem = Problem::new(components, self.class.clone())?;
        let (x_star, f_star) = self.optimum(&problem)?;
        let f0 = problem.evaluate_sum(&Vector::zeros(self.dim))?;
        let problem = problem.with_optimum(x_star, f_star)?.with_eps0(f0 - f_star);

        Ok(FinalizedGame {
            problem,
            floor: static_floor(&p),
            termination_round: termination_round(&p),
            rounds_closed: self.round_close_queries.len(),
            round_close_queries: self.round_close_queries,
            transcript: self.transcript,
            warnings: self.warnings,
            basis: self.basis.to_vec(),
            delta: self.delta,
            params: p,
        })
    }

    /// Exact optimum of the finalized average.
    fn optimum(&self, problem: &Problem) -> Result<(Vector, f64)> {
        let p = &self.params;
        let m = p.m as f64;
        let len = p.k + 1;
        let s: Vec<f64> = (0..p.k)
            .map(|r| self.delta[r].iter().filter(|&&d| d).count() as f64 / m)
            .collect();
        let x_star = match p.variant {
            DetVariant::Lipschitz => {
                // every term vanishes at z ≡ bB, and F ≥ 0
                let coords = vec![p.b_norm * p.radius; len];
                chain_point(&self.basis, &coords)
            }
            DetVariant::LipschitzSc => {
                let (head_w, head_b, edge) = self.abs_weights();
                let edge_w: Vec<f64> = (0..p.k).map(|r| s[r] * edge).collect();
                let y = vec![0.0; len];
                // argmin F̄(z) + ((λ+μ)/2)‖z‖², bisecting μ if the ball binds
                let solve =
                    |mu: f64| abs_chain_prox_coords(&y, p.lambda + mu, head_w, head_b, &edge_w);
                let z = ball_limited(solve, p.radius);
                chain_point(&self.basis, &z)
            }
            DetVariant::Smooth | DetVariant::SmoothSc => {
                let (coeff, a) = self.quad_scales();
                let tail = s[p.k - 1] * p.zeta;
                let avg = QuadChain::new(
                    self.basis.clone(),
                    len,
                    coeff,
                    s[0],
                    a,
                    s.clone(),
                    tail,
                );
                let solve = |mu: f64| quad_chain_argmin(&avg, p.lambda + mu);
                let z = if p.radius.is_finite() {
                    ball_limited(solve, p.radius)
                } else {
                    solve(0.0)
                };
                chain_point(&self.basis, &z)
            }
        };
        let f_star = problem.evaluate_sum(&x_star)?;
        Ok((x_star, f_star))
    }
}

fn coord_norm(z: &[f64]) -> f64 {
    z.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Bisects the Lagrange multiplier of the ball constraint over a
/// coordinate-space solve.
fn ball_limited(solve: impl Fn(f64) -> Vec<f64>, radius: f64) -> Vec<f64> {
    let z = solve(0.0);
    if coord_norm(&z) <= radius {
        return z;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while coord_norm(&solve(hi)) > radius {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if coord_norm(&solve(mid)) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    solve(hi)
}

fn static_floor(p: &DetParams) -> f64 {
    match p.variant {
        DetVariant::Lipschitz => p.l * p.radius * p.b_norm / (6.0 * (p.k as f64).sqrt()),
        DetVariant::LipschitzSc => {
            p.l * p.radius * p.b_norm / (6.0 * (p.k as f64).sqrt())
                - p.lambda * p.radius * p.radius / 2.0
        }
        DetVariant::Smooth => p.gamma * p.radius * p.radius / (32.0 * (p.k * p.k) as f64),
        DetVariant::SmoothSc => {
            let rq = p.cap_q.sqrt();
            p.eps0 * (1.0 - p.q.powi(2 * p.k as i32 + 2)) / rq
        }
    }
}

fn termination_round(p: &DetParams) -> usize {
    match p.variant {
        DetVariant::Lipschitz | DetVariant::LipschitzSc => p.k,
        DetVariant::Smooth => p.k / 2,
        DetVariant::SmoothSc => {
            let rq = p.cap_q.sqrt();
            (((rq - 1.0) / 4.0) * (p.eps0 / (2.0 * rq * p.eps)).ln())
                .floor()
                .max(0.0) as usize
        }
    }
}

impl OracleSource for DetAdversary {
    fn m(&self) -> usize {
        self.params.m
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn class(&self) -> FunctionClass {
        self.class.clone()
    }
    fn query(
        &mut self,
        i: usize,
        x: &Vector,
        beta: f64,
        ledger: &mut QueryLedger,
    ) -> Result<OracleResponse> {
        let resp = self.answer(i, x, beta)?;
        ledger.record(i, beta, x);
        Ok(resp)
    }
}

/// The frozen game: the static hard instance plus everything needed to
/// audit the answers that were given while it was being built.
pub struct FinalizedGame {
    pub problem: Problem,
    pub transcript: Vec<TranscriptEntry>,
    pub params: DetParams,
    /// v_0..v_k as frozen at finalization.
    pub basis: Vec<Vector>,
    /// δ rows for rounds 1..k (completed per the finalization policy).
    pub delta: Vec<Vec<bool>>,
    /// Floor value at game start (round-independent variants) or at t = 0.
    pub floor: f64,
    pub termination_round: usize,
    pub round_close_queries: Vec<u64>,
    pub rounds_closed: usize,
    pub warnings: Vec<String>,
}

impl FinalizedGame {
    /// Transcript entries with index below this count were issued while
    /// the floor was certified.
    pub fn floor_certified_queries(&self) -> u64 {
        let t = self.termination_round;
        if t == 0 {
            0
        } else if self.round_close_queries.len() >= t {
            self.round_close_queries[t - 1]
        } else {
            self.transcript.len() as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayKind {
    Value,
    Subgradient,
    Prox,
}

#[derive(Debug, Clone)]
pub struct ReplayViolation {
    pub entry: usize,
    pub kind: ReplayKind,
    pub magnitude: f64,
}

#[derive(Debug, Default)]
pub struct ReplayReport {
    pub entries_checked: usize,
    pub probes_per_entry: usize,
    pub violations: Vec<ReplayViolation>,
}

impl ReplayReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Consistency replay: every answer issued during the game must be an
/// answer the finalized functions could have given. The returned value
/// must equal f_i(x), the returned subgradient must satisfy the
/// subgradient inequality for the final f_i at sampled probe points, and
/// the returned prox must equal the final f_i's prox.
pub fn replay_verify(game: &FinalizedGame, probes: usize, seed: u64) -> ReplayReport {
    let problem = &game.problem;
    let radius = problem.radius();
    let dim = problem.dim();
    let scale = match radius {
        Some(b) => b,
        None => {
            let from_opt = game
                .problem
                .optimum()
                .map(|(x, _)| 2.0 * x.norm())
                .unwrap_or(1.0);
            from_opt.max(1.0)
        }
    };
    let mut rng = crate::rng::stream(seed, 0x8e91a);
    let probe_points: Vec<Vector> = (0..probes)
        .map(|_| {
            let mut y = Vector::zeros(dim);
            for v in y.as_mut_slice() {
                *v = rng.gen_range(-scale..scale);
            }
            crate::oracle::project_ball(&y, radius)
        })
        .collect();
    let mut probe_values: Vec<Option<Vec<f64>>> = vec![None; problem.m()];
    let mut report = ReplayReport {
        probes_per_entry: probes,
        ..Default::default()
    };
    for (idx, entry) in game.transcript.iter().enumerate() {
        let comp = problem.component(entry.component).clone();
        let vals = probe_values[entry.component]
            .get_or_insert_with(|| probe_points.iter().map(|y| comp.value(y)).collect());
        let fx = comp.value(&entry.point);
        if (fx - entry.value).abs() > 1e-9 * (1.0 + entry.value.abs()) {
            report.violations.push(ReplayViolation {
                entry: idx,
                kind: ReplayKind::Value,
                magnitude: (fx - entry.value).abs(),
            });
        }
        let mut worst = 0f64;
        for (y, fy) in probe_points.iter().zip(vals.iter()) {
            let lin = fx + entry.gradient.dot(&y.sub(&entry.point));
            worst = worst.max(lin - fy);
        }
        if worst > crate::tol::SUBGRADIENT_SLACK {
            report.violations.push(ReplayViolation {
                entry: idx,
                kind: ReplayKind::Subgradient,
                magnitude: worst,
            });
        }
        let fresh = ball_prox(comp.as_ref(), &entry.point, entry.beta, radius);
        let dist = fresh.dist(&entry.prox);
        if dist > 1e-6 {
            report.violations.push(ReplayViolation {
                entry: idx,
                kind: ReplayKind::Prox,
                magnitude: dist,
            });
        }
        report.entries_checked += 1;
    }
    report
}

/// A static smooth chain sum with the same functional shape as the
/// adversary's finalized smooth instance, on the standard basis. The row
/// pattern δ_{i,r} = [(i + r) mod m < ⌊m/2⌋] keeps every round's row sum
/// at exactly ⌊m/2⌋, so the closed-form optimum applies.
pub fn synthetic_chain_problem(m: usize, k: usize, gamma: f64, radius: f64) -> Result<Problem> {
    if m < 2 || k < 2 {
        return Err(Error::InvalidParameter("need m >= 2 and k >= 2".into()));
    }
    let d = k + 1;
    let basis = Arc::new((0..d).map(|j| Vector::basis(d, j)).collect::<Vec<_>>());
    let a = (3.0 / (k + 1) as f64).sqrt() * radius;
    let coeff = gamma / 8.0;
    let gate = |i: usize, r: usize| (i + r) % m < m / 2;
    let comps: Vec<Arc<dyn ComponentOracle>> = (0..m)
        .map(|i| {
            let head = if gate(i, 1) { 1.0 } else { 0.0 };
            let edge: Vec<f64> = (1..=k).map(|r| if gate(i, r) { 1.0 } else { 0.0 }).collect();
            let tail = if gate(i, k) { 1.0 } else { 0.0 };
            Arc::new(QuadChain::new(basis.clone(), d, coeff, head, a, edge, tail))
                as Arc<dyn ComponentOracle>
        })
        .collect();
    let problem = Problem::new(comps, FunctionClass::smooth(gamma, Some(radius)))?;
    let coords: Vec<f64> = (0..d)
        .map(|r| a * (1.0 - (r + 1) as f64 / (k + 2) as f64))
        .collect();
    let x_star = chain_point(&basis, &coords);
    let f_star = problem.evaluate_sum(&x_star)?;
    let f0 = problem.evaluate_sum(&Vector::zeros(d))?;
    problem
        .with_optimum(x_star, f_star)
        .map(|p| p.with_eps0(f0 - f_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_formulas_match_the_construction() {
        let adv = DetAdversary::lipschitz(8, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
        assert_eq!(adv.k(), 2);
        assert!((adv.params().b_norm - 1.0 / 3f64.sqrt()).abs() < 1e-15);

        let adv = DetAdversary::smooth(4, 1.0, 1.0, 1.0 / 512.0, None).unwrap();
        assert_eq!(adv.k(), 4);
        assert!((adv.params().a_norm - (3.0f64 / 5.0).sqrt()).abs() < 1e-15);

        let adv = DetAdversary::smooth_sc(2, 1.0, 0.01, 1e-4, Some(0.3), None).unwrap();
        assert!((adv.params().cap_q - 50.5).abs() < 1e-12);
        assert!((adv.params().zeta - (1.0 - adv.params().q)).abs() < 1e-15);
        assert!(adv.params().k + 1 >= adv.termination_round());
    }

    #[test]
    fn first_query_answers_from_the_initial_truncation() {
        let mut adv = DetAdversary::lipschitz(4, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
        let x0 = Vector::zeros(adv.dim());
        let resp = adv.answer(0, &x0, 1.0).unwrap();
        let b = adv.params().b_norm;
        assert!((resp.value - b / 2f64.sqrt()).abs() < 1e-15);
        let expected = adv.basis()[0].scale(-1.0 / 2f64.sqrt());
        assert!(resp.gradient.dist(&expected) < 1e-15);
    }

    #[test]
    fn rounds_close_on_distinct_component_count() {
        let m = 5; // ⌈m/2⌉ = 3
        let mut adv = DetAdversary::lipschitz(m, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
        let x0 = Vector::zeros(adv.dim());
        assert_eq!(adv.round(), 1);
        adv.answer(0, &x0, 1.0).unwrap();
        adv.answer(0, &x0, 2.0).unwrap(); // repeat does not advance
        adv.answer(1, &x0, 1.0).unwrap();
        assert_eq!(adv.round(), 1);
        adv.answer(2, &x0, 1.0).unwrap();
        assert_eq!(adv.round(), 2);
        assert_eq!(adv.delta[0], vec![false, false, false, true, true]);
        let row_sum: usize = adv.delta[0].iter().filter(|&&d| d).count();
        assert_eq!(row_sum, m / 2);
        assert_eq!(adv.round_close_queries(), &[4]);
    }

    #[test]
    fn floor_values_match_the_formulas() {
        let adv = DetAdversary::lipschitz(8, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
        // k = 2, b = 1/√3 → b/(6√2) = 1/(6√6)
        assert!((adv.theoretical_floor() - 1.0 / (6.0 * 6f64.sqrt())).abs() < 1e-12);
        assert!(adv.theoretical_floor() > adv.params().eps);

        let adv = DetAdversary::smooth(4, 1.0, 1.0, 1.0 / 512.0, None).unwrap();
        assert!((adv.theoretical_floor() - 1.0 / 512.0).abs() < 1e-15); // 1/(32·16)

        let adv = DetAdversary::smooth_sc(2, 1.0, 0.01, 1e-4, Some(0.3), None).unwrap();
        let p = adv.params();
        let expect = p.eps0 * (1.0 - p.q.powi(2 * p.k as i32 + 2)) / p.cap_q.sqrt();
        assert!((adv.theoretical_floor() - expect).abs() < 1e-15);
    }

    #[test]
    fn immediate_finalize_has_exact_metadata() {
        // lipschitz: F* = 0 at ‖x*‖ = B
        let adv = DetAdversary::lipschitz(4, 1.0, 1.0, 1.0 / 24.0, None).unwrap();
        let game = adv.finalize().unwrap();
        let (x_star, f_star) = game.problem.optimum().unwrap();
        assert!(f_star.abs() < 1e-15);
        assert!((x_star.norm() - 1.0).abs() < 1e-12);

        // smooth: closed-form F* when every row sum is ⌊m/2⌋
        let adv = DetAdversary::smooth(4, 1.0, 1.0, 1.0 / 512.0, None).unwrap();
        let k = adv.k();
        let a2 = adv.params().a_norm * adv.params().a_norm;
        let game = adv.finalize().unwrap();
        let (_, f_star) = game.problem.optimum().unwrap();
        let expect = -(a2 * 2.0) / (8.0 * 4.0) * (1.0 - 1.0 / (k as f64 + 2.0));
        assert!(
            (f_star - expect).abs() < 1e-12,
            "F* {f_star} vs closed form {expect}"
        );

        // smooth_sc: F(0) − F* = ε₀ and x* = C Σ q^{r+1} v_r
        let eps0 = 0.3;
        let adv = DetAdversary::smooth_sc(2, 1.0, 0.01, 1e-4, Some(eps0), None).unwrap();
        let p = adv.params().clone();
        let basis_snapshot: Vec<Vector> = adv.basis().to_vec();
        let game = adv.finalize().unwrap();
        let realized = game.problem.eps0().unwrap();
        assert!(
            (realized - eps0).abs() < 1e-9 * (1.0 + eps0),
            "eps0 realized {realized} target {eps0}"
        );
        let (x_star, _) = game.problem.optimum().unwrap();
        for (r, v) in basis_snapshot.iter().enumerate() {
            let want = p.cap_c * p.q.powi(r as i32 + 1);
            assert!(
                (x_star.dot(v) - want).abs() < 1e-9 * (1.0 + want.abs()),
                "coord {r}"
            );
        }
    }

    #[test]
    fn truncated_proxes_satisfy_optimality() {
        use rand::Rng;
        let mut adv = DetAdversary::smooth(4, 1.0, 1.0, 1.0 / 512.0, None).unwrap();
        let d = adv.dim();
        let x0 = Vector::zeros(d);
        adv.answer(0, &x0, 1.0).unwrap();
        adv.answer(1, &x0, 1.0).unwrap();
        assert_eq!(adv.round(), 2);
        let mut rng = crate::rng::rng(8);
        for _ in 0..10 {
            let mut x = Vector::zeros(d);
            for v in x.as_mut_slice().iter_mut().take(6) {
                *v = rng.gen_range(-0.5..0.5);
            }
            let comp = adv.current_component(2);
            let beta = rng.gen_range(0.3..4.0);
            let u = ball_prox(comp.as_ref(), &x, beta, Some(1.0));
            let res = crate::oracle::check_prox_optimality(comp.as_ref(), &x, beta, &u, Some(1.0));
            assert!(res <= crate::tol::PROX_RESIDUAL, "residual {res}");
        }
    }

    #[test]
    fn synthetic_chain_matches_closed_form() {
        let m = 8;
        let k = 10;
        let p = synthetic_chain_problem(m, k, 1.0, 1.0).unwrap();
        let (x_star, f_star) = p.optimum().unwrap();
        assert!(x_star.norm() <= 1.0 + 1e-12);
        let a2 = 3.0 / (k + 1) as f64;
        let expect = -(a2 * (m / 2) as f64) / (8.0 * m as f64) * (1.0 - 1.0 / (k as f64 + 2.0));
        assert!((f_star - expect).abs() < 1e-12);
    }
}
