//! Chain-structured components: the hard instances live in the span of an
//! orthonormal basis v_0..v_{n−1} and couple only adjacent inner products
//! z_r = ⟨x, v_r⟩.
//!
//! [`AbsChain`] is w₀|z₀ − b| + Σ_r w_r|z_{r−1} − z_r| (a weighted fused
//! lasso); its prox is solved exactly by dynamic programming over the
//! derivative, represented as a monotone piecewise-linear function, with
//! clamp intervals recorded for the backward pass. [`QuadChain`] is the
//! squared-difference analog; its prox is a symmetric positive-definite
//! tridiagonal solve. The orthogonal complement of the basis passes
//! through both proxes unchanged.

use std::sync::Arc;

use crate::linalg::solve_tridiag;
use crate::oracle::{ComponentOracle, SubgradientBox};
use crate::vector::Vector;

fn sign0(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Nondecreasing piecewise-linear function with jump discontinuities:
/// the derivative of a convex piecewise-quadratic message.
#[derive(Debug, Clone)]
struct Monotone {
    xs: Vec<f64>,
    /// value approaching xs[i] from the left
    vl: Vec<f64>,
    /// value at / just right of xs[i]
    vr: Vec<f64>,
    /// xs.len() + 1 segment slopes
    slopes: Vec<f64>,
}

impl Monotone {
    /// Derivative of (β/2)(z − y)² + w|z − b|.
    fn init_head(beta: f64, y: f64, w: f64, b: f64) -> Self {
        Monotone {
            xs: vec![b],
            vl: vec![beta * (b - y) - w],
            vr: vec![beta * (b - y) + w],
            slopes: vec![beta, beta],
        }
    }

    fn eval_right(&self, z: f64) -> f64 {
        let n = self.xs.len();
        if z < self.xs[0] {
            return self.vl[0] - self.slopes[0] * (self.xs[0] - z);
        }
        let mut i = n - 1;
        for j in (0..n).rev() {
            if self.xs[j] <= z {
                i = j;
                break;
            }
        }
        if self.xs[i] == z {
            self.vr[i]
        } else {
            self.vr[i] + self.slopes[i + 1] * (z - self.xs[i])
        }
    }

    fn eval_left(&self, z: f64) -> f64 {
        let n = self.xs.len();
        if z <= self.xs[0] {
            return self.vl[0] - self.slopes[0] * (self.xs[0] - z);
        }
        for j in (0..n).rev() {
            if self.xs[j] < z {
                if j + 1 < n && self.xs[j + 1] == z {
                    return self.vl[j + 1];
                }
                return self.vr[j] + self.slopes[j + 1] * (z - self.xs[j]);
            }
        }
        unreachable!()
    }

    /// Smallest z with value ≥ target. Tail slopes must be positive
    /// (guaranteed after `add_quad`).
    fn crossing(&self, target: f64) -> f64 {
        let n = self.xs.len();
        if self.vl[0] >= target {
            let s = self.slopes[0];
            if s <= 0.0 {
                return self.xs[0];
            }
            return self.xs[0] - (self.vl[0] - target) / s;
        }
        for i in 0..n {
            if self.vr[i] >= target {
                return self.xs[i];
            }
            if i + 1 < n {
                if self.vl[i + 1] >= target {
                    let s = self.slopes[i + 1];
                    if s <= 0.0 {
                        return self.xs[i + 1];
                    }
                    return self.xs[i] + (target - self.vr[i]) / s;
                }
            }
        }
        let s = self.slopes[n];
        debug_assert!(s > 0.0, "unbounded crossing search");
        self.xs[n - 1] + (target - self.vr[n - 1]) / s
    }

    /// Pointwise clip to [−w, w]; returns the clamp interval (lo, hi)
    /// where the original function crosses ∓w.
    fn clip(&self, w: f64) -> (Monotone, f64, f64) {
        let lo = self.crossing(-w);
        let hi = self.crossing(w);
        let mut pts: Vec<f64> = Vec::new();
        pts.push(lo);
        for &x in &self.xs {
            if x > lo && x < hi {
                pts.push(x);
            }
        }
        if hi > lo {
            pts.push(hi);
        }
        let clamp = |v: f64| v.clamp(-w, w);
        let vl: Vec<f64> = pts.iter().map(|&p| clamp(self.eval_left(p))).collect();
        let vr: Vec<f64> = pts.iter().map(|&p| clamp(self.eval_right(p))).collect();
        let mut slopes = vec![0.0; pts.len() + 1];
        for i in 1..pts.len() {
            let dx = pts[i] - pts[i - 1];
            if dx > 0.0 {
                slopes[i] = ((vl[i] - vr[i - 1]) / dx).max(0.0);
            }
        }
        (
            Monotone {
                xs: pts,
                vl,
                vr,
                slopes,
            },
            lo,
            hi,
        )
    }

    /// Adds the derivative β(z − y) of a new quadratic term.
    fn add_quad(&mut self, beta: f64, y: f64) {
        for i in 0..self.xs.len() {
            let shift = beta * (self.xs[i] - y);
            self.vl[i] += shift;
            self.vr[i] += shift;
        }
        for s in &mut self.slopes {
            *s += beta;
        }
    }

    fn root(&self) -> f64 {
        self.crossing(0.0)
    }
}

/// Exact minimizer of
/// (β/2)Σ(z_r − y_r)² + w₀|z₀ − b| + Σ_{r≥1} w_r|z_{r−1} − z_r|.
pub fn abs_chain_prox_coords(
    y: &[f64],
    beta: f64,
    head_w: f64,
    head_b: f64,
    edge_w: &[f64],
) -> Vec<f64> {
    let n = y.len();
    assert_eq!(edge_w.len() + 1, n);
    let mut msg = Monotone::init_head(beta, y[0], head_w, head_b);
    let mut clamps: Vec<(f64, f64)> = Vec::with_capacity(n - 1);
    for r in 1..n {
        let (clipped, lo, hi) = msg.clip(edge_w[r - 1]);
        clamps.push((lo, hi));
        msg = clipped;
        msg.add_quad(beta, y[r]);
    }
    let mut z = vec![0.0; n];
    z[n - 1] = msg.root();
    for r in (1..n).rev() {
        let (lo, hi) = clamps[r - 1];
        z[r - 1] = z[r].clamp(lo, hi);
    }
    z
}

/// w₀|z₀ − b| + Σ_r w_r|z_{r−1} − z_r| over the first `len` basis vectors.
#[derive(Clone)]
pub struct AbsChain {
    basis: Arc<Vec<Vector>>,
    len: usize,
    head_w: f64,
    head_b: f64,
    edge_w: Vec<f64>,
}

impl AbsChain {
    pub fn new(
        basis: Arc<Vec<Vector>>,
        len: usize,
        head_w: f64,
        head_b: f64,
        edge_w: Vec<f64>,
    ) -> Self {
        assert!(len >= 1 && len <= basis.len());
        assert_eq!(edge_w.len() + 1, len);
        AbsChain {
            basis,
            len,
            head_w,
            head_b,
            edge_w,
        }
    }

    fn coords(&self, x: &Vector) -> Vec<f64> {
        (0..self.len).map(|r| x.dot(&self.basis[r])).collect()
    }
}

impl ComponentOracle for AbsChain {
    fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        let z = self.coords(x);
        let mut v = self.head_w * (z[0] - self.head_b).abs();
        for r in 1..self.len {
            v += self.edge_w[r - 1] * (z[r - 1] - z[r]).abs();
        }
        v
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let z = self.coords(x);
        let mut g = Vector::zeros(self.dim());
        g.axpy(self.head_w * sign0(z[0] - self.head_b), &self.basis[0]);
        for r in 1..self.len {
            let s = self.edge_w[r - 1] * sign0(z[r - 1] - z[r]);
            if s != 0.0 {
                g.axpy(s, &self.basis[r - 1]);
                g.axpy(-s, &self.basis[r]);
            }
        }
        g
    }

    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        let y = self.coords(x);
        let z = abs_chain_prox_coords(&y, beta, self.head_w, self.head_b, &self.edge_w);
        let mut u = x.clone();
        for r in 0..self.len {
            u.axpy(z[r] - y[r], &self.basis[r]);
        }
        u
    }

    fn subgradient_box(&self, u: &Vector) -> Option<SubgradientBox> {
        let z = self.coords(u);
        let mut fixed = Vector::zeros(self.dim());
        let mut dirs = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        // Exact kink solves land within rounding of the kink, so detection
        // needs a tolerance; this widens the box by an O(1e−9) shell.
        let near = |d: f64, scale: f64| d.abs() <= 1e-9 * (1.0 + scale.abs());
        if near(z[0] - self.head_b, z[0]) {
            dirs.push(self.basis[0].clone());
            lo.push(-self.head_w);
            hi.push(self.head_w);
        } else {
            fixed.axpy(self.head_w * sign0(z[0] - self.head_b), &self.basis[0]);
        }
        for r in 1..self.len {
            let w = self.edge_w[r - 1];
            if w == 0.0 {
                continue;
            }
            let d = z[r - 1] - z[r];
            if near(d, z[r]) {
                dirs.push(self.basis[r - 1].sub(&self.basis[r]));
                lo.push(-w);
                hi.push(w);
            } else {
                let s = w * sign0(d);
                fixed.axpy(s, &self.basis[r - 1]);
                fixed.axpy(-s, &self.basis[r]);
            }
        }
        Some(SubgradientBox {
            fixed,
            dirs,
            lo,
            hi,
        })
    }
}

/// coeff·( head·(z₀² − 2az₀) + Σ_r e_r (z_{r−1} − z_r)² + tail·z_{n−1}² )
#[derive(Clone)]
pub struct QuadChain {
    basis: Arc<Vec<Vector>>,
    len: usize,
    coeff: f64,
    head: f64,
    a: f64,
    edge: Vec<f64>,
    tail: f64,
}

impl QuadChain {
    pub fn new(
        basis: Arc<Vec<Vector>>,
        len: usize,
        coeff: f64,
        head: f64,
        a: f64,
        edge: Vec<f64>,
        tail: f64,
    ) -> Self {
        assert!(len >= 1 && len <= basis.len());
        assert_eq!(edge.len() + 1, len);
        QuadChain {
            basis,
            len,
            coeff,
            head,
            a,
            edge,
            tail,
        }
    }

    fn coords(&self, x: &Vector) -> Vec<f64> {
        (0..self.len).map(|r| x.dot(&self.basis[r])).collect()
    }

    /// Matrix of the quadratic form (without the coeff factor).
    fn form(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        diag[0] += self.head;
        diag[n - 1] += self.tail;
        for r in 1..n {
            let e = self.edge[r - 1];
            diag[r - 1] += e;
            diag[r] += e;
            off[r - 1] -= e;
        }
        (diag, off)
    }
}

impl ComponentOracle for QuadChain {
    fn dim(&self) -> usize {
        self.basis[0].dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        let z = self.coords(x);
        let mut v = self.head * (z[0] * z[0] - 2.0 * self.a * z[0]);
        for r in 1..self.len {
            let d = z[r - 1] - z[r];
            v += self.edge[r - 1] * d * d;
        }
        v += self.tail * z[self.len - 1] * z[self.len - 1];
        self.coeff * v
    }

    fn subgradient(&self, x: &Vector) -> Vector {
        let z = self.coords(x);
        let mut g = Vector::zeros(self.dim());
        g.axpy(
            self.coeff * self.head * (2.0 * z[0] - 2.0 * self.a),
            &self.basis[0],
        );
        for r in 1..self.len {
            let c = self.coeff * 2.0 * self.edge[r - 1] * (z[r - 1] - z[r]);
            if c != 0.0 {
                g.axpy(c, &self.basis[r - 1]);
                g.axpy(-c, &self.basis[r]);
            }
        }
        g.axpy(
            self.coeff * 2.0 * self.tail * z[self.len - 1],
            &self.basis[self.len - 1],
        );
        g
    }

    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        let y = self.coords(x);
        let n = self.len;
        let (mut diag, mut off) = self.form();
        for d in &mut diag {
            *d = beta + 2.0 * self.coeff * *d;
        }
        for o in &mut off {
            *o *= 2.0 * self.coeff;
        }
        let mut rhs: Vec<f64> = y.iter().map(|&v| beta * v).collect();
        rhs[0] += 2.0 * self.coeff * self.head * self.a;
        let z = solve_tridiag(&diag, &off, &rhs);
        let mut u = x.clone();
        for r in 0..n {
            u.axpy(z[r] - y[r], &self.basis[r]);
        }
        u
    }
}

/// Exact minimizer of coeff·q(z) + (λ/2)‖z‖² in chain coordinates
/// (λ = 0 allowed when the form itself is positive definite).
pub fn quad_chain_argmin(chain: &QuadChain, lambda: f64) -> Vec<f64> {
    let (mut diag, mut off) = chain.form();
    for d in &mut diag {
        *d = lambda + 2.0 * chain.coeff * *d;
    }
    for o in &mut off {
        *o *= 2.0 * chain.coeff;
    }
    let mut rhs = vec![0.0; chain.len];
    rhs[0] = 2.0 * chain.coeff * chain.head * chain.a;
    solve_tridiag(&diag, &off, &rhs)
}

pub(crate) fn chain_point(basis: &[Vector], coords: &[f64]) -> Vector {
    let mut x = Vector::zeros(basis[0].dim());
    for (c, v) in coords.iter().zip(basis) {
        x.axpy(*c, v);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute::brute_prox_free;
    use crate::oracle::{ball_prox, check_prox_optimality};
    use rand::Rng;

    fn random_basis(dim: usize, n: usize, seed: u64) -> Arc<Vec<Vector>> {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::rng(seed);
        let mut basis: Vec<Vector> = Vec::new();
        while basis.len() < n {
            let mut v = Vector::zeros(dim);
            for e in v.as_mut_slice() {
                *e = StandardNormal.sample(&mut rng);
            }
            for w in &basis {
                v.axpy(-v.dot(w), w);
            }
            for w in &basis {
                v.axpy(-v.dot(w), w);
            }
            let norm = v.norm();
            if norm > 1e-6 {
                basis.push(v.scale(1.0 / norm));
            }
        }
        Arc::new(basis)
    }

    #[test]
    fn abs_chain_prox_matches_brute_force() {
        let mut rng = crate::rng::rng(21);
        for trial in 0..40 {
            let n = rng.gen_range(1..6);
            let basis = random_basis(8, n, 100 + trial);
            let head_w = rng.gen_range(0.1..1.0);
            let head_b = rng.gen_range(-0.8..0.8);
            let edge_w: Vec<f64> = (1..n)
                .map(|_| {
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.05..0.8)
                    }
                })
                .collect();
            let chain = AbsChain::new(basis, n, head_w, head_b, edge_w);
            let mut x = Vector::zeros(8);
            for e in x.as_mut_slice() {
                *e = rng.gen_range(-1.5..1.5);
            }
            let beta = rng.gen_range(0.5..6.0);
            let fast = chain.prox_free(&x, beta);
            let brute = brute_prox_free(&chain, &x, beta, 30_000, 0.0);
            let dist_cert = brute.residual / beta;
            assert!(
                fast.dist(&brute.point) <= 1e-8 + dist_cert,
                "trial {trial}: dist {} cert {dist_cert}",
                fast.dist(&brute.point)
            );
            // objective value of the fast solution is never worse
            let h = |u: &Vector| chain.value(u) + 0.5 * beta * u.dist(&x).powi(2);
            assert!(h(&fast) <= h(&brute.point) + 1e-12);
        }
    }

    #[test]
    fn quad_chain_prox_is_exact() {
        let mut rng = crate::rng::rng(33);
        for trial in 0..30 {
            let n = rng.gen_range(1..7);
            let basis = random_basis(9, n, 500 + trial);
            let edge: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let chain = QuadChain::new(
                basis,
                n,
                rng.gen_range(0.05..0.3),
                1.0,
                rng.gen_range(-1.0..1.0),
                edge,
                rng.gen_range(0.0..1.0),
            );
            let mut x = Vector::zeros(9);
            for e in x.as_mut_slice() {
                *e = rng.gen_range(-1.5..1.5);
            }
            let beta = rng.gen_range(0.3..5.0);
            let u = ball_prox(&chain, &x, beta, Some(3.0));
            let res = check_prox_optimality(&chain, &x, beta, &u, Some(3.0));
            assert!(res < crate::tol::PROX_RESIDUAL, "residual {res}");
        }
    }

    #[test]
    fn abs_chain_ball_prox_is_optimal() {
        let mut rng = crate::rng::rng(77);
        for trial in 0..20 {
            let n = rng.gen_range(2..5);
            let basis = random_basis(6, n, 900 + trial);
            let edge_w: Vec<f64> = (1..n).map(|_| rng.gen_range(0.05..0.5)).collect();
            let chain = AbsChain::new(basis, n, 0.7, 0.9, edge_w);
            let mut x = Vector::zeros(6);
            for e in x.as_mut_slice() {
                *e = rng.gen_range(-2.0..2.0);
            }
            let beta = rng.gen_range(0.5..4.0);
            let radius = Some(1.0);
            let u = ball_prox(&chain, &x, beta, radius);
            assert!(u.norm() <= 1.0 + 1e-9);
            let res = check_prox_optimality(&chain, &x, beta, &u, radius);
            assert!(res < crate::tol::PROX_RESIDUAL, "residual {res}");
        }
    }
}
