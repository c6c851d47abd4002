//! Concrete test components with closed-form proxes, and builders for the
//! synthetic problem families used throughout the tests and the harness.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::linalg;
use crate::oracle::{ComponentOracle, FunctionClass, Problem, SubgradientBox};
use crate::rng;
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

fn soft(t: f64, tau: f64) -> f64 {
    sign0(t) * (t.abs() - tau).max(0.0)
}

/// f(x) = (c/2)‖x − a‖²
#[derive(Debug, Clone)]
pub struct Quadratic {
    center: Vector,
    curvature: f64,
}

impl Quadratic {
    pub fn new(dim: usize, center: Vector, curvature: f64) -> Self {
        assert_eq!(center.dim(), dim);
        assert!(curvature >= 0.0);
        Quadratic { center, curvature }
    }

    /// ‖x‖²/2
    pub fn half_sq_norm(dim: usize) -> Self {
        Quadratic::new(dim, Vector::zeros(dim), 1.0)
    }
}

impl ComponentOracle for Quadratic {
    fn dim(&self) -> usize {
        self.center.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * self.curvature * x.dist(&self.center).powi(2)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        x.sub(&self.center).scale(self.curvature)
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        // argmin (c/2)‖u−a‖² + (β/2)‖u−x‖² = (c·a + β·x)/(c+β)
        let c = self.curvature;
        self.center
            .scale(c / (c + beta))
            .add(&x.scale(beta / (c + beta)))
    }
    fn minimizer(&self) -> Option<(Vector, f64)> {
        Some((self.center.clone(), 0.0))
    }
}

/// f(x) = |x_j − a|: one-coordinate absolute deviation.
#[derive(Debug, Clone)]
pub struct AbsDev {
    dim: usize,
    coord: usize,
    center: f64,
}

impl AbsDev {
    pub fn new(dim: usize, coord: usize, center: f64) -> Self {
        assert!(coord < dim);
        AbsDev { dim, coord, center }
    }
}

impl ComponentOracle for AbsDev {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (x[self.coord] - self.center).abs()
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.dim);
        g[self.coord] = sign0(x[self.coord] - self.center);
        g
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        let mut u = x.clone();
        u[self.coord] = self.center + soft(x[self.coord] - self.center, 1.0 / beta);
        u
    }
    fn subgradient_box(&self, u: &Vector) -> Option<SubgradientBox> {
        let z = u[self.coord];
        if (z - self.center).abs() <= 1e-9 * (1.0 + z.abs()) {
            Some(SubgradientBox {
                fixed: Vector::zeros(self.dim),
                dirs: vec![Vector::basis(self.dim, self.coord)],
                lo: vec![-1.0],
                hi: vec![1.0],
            })
        } else {
            Some(SubgradientBox::singleton(self.subgradient(u)))
        }
    }
    fn minimizer(&self) -> Option<(Vector, f64)> {
        let mut x = Vector::zeros(self.dim);
        x[self.coord] = self.center;
        Some((x, 0.0))
    }
}

/// f(x) = max(0, a − x_j): hinge on one coordinate.
#[derive(Debug, Clone)]
pub struct Hinge {
    dim: usize,
    coord: usize,
    margin: f64,
}

impl Hinge {
    pub fn new(dim: usize, coord: usize, margin: f64) -> Self {
        assert!(coord < dim);
        Hinge { dim, coord, margin }
    }
}

impl ComponentOracle for Hinge {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.margin - x[self.coord]).max(0.0)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(self.dim);
        if x[self.coord] < self.margin {
            g[self.coord] = -1.0;
        }
        g
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        let mut u = x.clone();
        let y = x[self.coord];
        u[self.coord] = if y >= self.margin {
            y
        } else {
            (y + 1.0 / beta).min(self.margin)
        };
        u
    }
    fn subgradient_box(&self, u: &Vector) -> Option<SubgradientBox> {
        let z = u[self.coord];
        if (z - self.margin).abs() <= 1e-9 * (1.0 + z.abs()) {
            Some(SubgradientBox {
                fixed: Vector::zeros(self.dim),
                dirs: vec![Vector::basis(self.dim, self.coord)],
                lo: vec![-1.0],
                hi: vec![0.0],
            })
        } else {
            Some(SubgradientBox::singleton(self.subgradient(u)))
        }
    }
}

/// f(x) = ⟨g, x⟩
#[derive(Debug, Clone)]
pub struct Linear {
    grad: Vector,
}

impl Linear {
    pub fn new(grad: Vector) -> Self {
        Linear { grad }
    }
}

impl ComponentOracle for Linear {
    fn dim(&self) -> usize {
        self.grad.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.grad.dot(x)
    }
    fn subgradient(&self, _x: &Vector) -> Vector {
        self.grad.clone()
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        let mut u = x.clone();
        u.axpy(-1.0 / beta, &self.grad);
        u
    }
}

/// f(x) = ½(⟨a, x⟩ − b)²
#[derive(Debug, Clone)]
pub struct LeastSquares {
    row: Vector,
    target: f64,
}

impl LeastSquares {
    pub fn new(row: Vector, target: f64) -> Self {
        LeastSquares { row, target }
    }

    pub fn smoothness(&self) -> f64 {
        self.row.dot(&self.row)
    }
}

impl ComponentOracle for LeastSquares {
    fn dim(&self) -> usize {
        self.row.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (self.row.dot(x) - self.target).powi(2)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        self.row.scale(self.row.dot(x) - self.target)
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        // (βI + aaᵀ)u = βx + b·a, inverted by Sherman–Morrison.
        let aa = self.row.dot(&self.row);
        let mut rhs = x.scale(beta);
        rhs.axpy(self.target, &self.row);
        let coef = self.row.dot(&rhs) / (beta + aa);
        let mut u = rhs;
        u.axpy(-coef, &self.row);
        u.scale(1.0 / beta)
    }
}

/// f(x) + (λ/2)‖x‖²: the regularization wrapper behind the strong-convexity
/// reductions. Its prox comes from the base oracle by completing the
/// square: prox_{f+λ‖·‖²/2}(x, β) = prox_f(βx/(β+λ), β+λ).
#[derive(Clone)]
pub struct Regularized {
    base: Arc<dyn ComponentOracle>,
    lambda: f64,
}

impl Regularized {
    pub fn new(base: Arc<dyn ComponentOracle>, lambda: f64) -> Self {
        assert!(lambda >= 0.0);
        Regularized { base, lambda }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl ComponentOracle for Regularized {
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.base.value(x) + 0.5 * self.lambda * x.dot(x)
    }
    fn subgradient(&self, x: &Vector) -> Vector {
        let mut g = self.base.subgradient(x);
        g.axpy(self.lambda, x);
        g
    }
    fn prox_free(&self, x: &Vector, beta: f64) -> Vector {
        self.base
            .prox_free(&x.scale(beta / (beta + self.lambda)), beta + self.lambda)
    }
    fn subgradient_box(&self, u: &Vector) -> Option<SubgradientBox> {
        let mut sbox = self.base.subgradient_box(u)?;
        sbox.fixed.axpy(self.lambda, u);
        Some(sbox)
    }
}

/// The zero function (odd-m padding for pair constructions).
#[derive(Debug, Clone)]
pub struct Zero {
    dim: usize,
}

impl Zero {
    pub fn new(dim: usize) -> Self {
        Zero { dim }
    }
}

impl ComponentOracle for Zero {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn subgradient(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.dim)
    }
    fn prox_free(&self, x: &Vector, _beta: f64) -> Vector {
        x.clone()
    }
    fn minimizer(&self) -> Option<(Vector, f64)> {
        Some((Vector::zeros(self.dim), 0.0))
    }
}

/// m absolute deviations |x − a_i| on ℝ with domain |x| ≤ b. The optimum
/// is the median of the centers (midpoint of the middle pair for even m).
pub fn median_problem(centers: &[f64], b: f64) -> Result<Problem> {
    let comps: Vec<Arc<dyn ComponentOracle>> = centers
        .iter()
        .map(|&a| Arc::new(AbsDev::new(1, 0, a)) as Arc<dyn ComponentOracle>)
        .collect();
    let mut sorted = centers.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let med = if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    };
    let med = med.clamp(-b, b);
    let f_star = sorted.iter().map(|a| (med - a).abs()).sum::<f64>() / m as f64;
    let problem = Problem::new(comps, FunctionClass::lipschitz(1.0, Some(b)))?;
    let f0 = problem.evaluate_sum(&Vector::zeros(1))?;
    problem
        .with_optimum(Vector::from_slice(&[med]), f_star)
        .map(|p| p.with_eps0(f0 - f_star))
}

/// Consistent random least squares: b_i = ⟨a_i, x♮⟩, so F* = 0 at x♮.
/// Optionally adds (λ/2)‖x‖² to every component; the optimum is then
/// recomputed from the regularized normal equations.
pub fn least_squares_problem(m: usize, d: usize, lambda: f64, seed: u64) -> Result<Problem> {
    let mut rng = rng::rng(seed);
    let mut rows: Vec<Vector> = Vec::with_capacity(m);
    for _ in 0..m {
        let mut r = Vector::zeros(d);
        for v in r.as_mut_slice() {
            *v = StandardNormal.sample(&mut rng);
        }
        // unit rows keep the per-component smoothness at exactly 1 − λ,
        // so the regularized class is (1, λ)
        let n = r.norm();
        let r = r.scale((1.0 - lambda).sqrt() / n);
        rows.push(r);
    }
    let mut x_nat = Vector::zeros(d);
    for v in x_nat.as_mut_slice() {
        *v = rng.gen_range(-1.0..1.0);
    }
    let targets: Vec<f64> = rows.iter().map(|r| r.dot(&x_nat)).collect();

    if lambda == 0.0 {
        let comps: Vec<Arc<dyn ComponentOracle>> = rows
            .iter()
            .zip(&targets)
            .map(|(r, &t)| Arc::new(LeastSquares::new(r.clone(), t)) as Arc<dyn ComponentOracle>)
            .collect();
        let problem = Problem::new(comps, FunctionClass::smooth(1.0, None))?;
        return problem.with_optimum(x_nat, 0.0);
    }

    let comps: Vec<Arc<dyn ComponentOracle>> = rows
        .iter()
        .zip(&targets)
        .map(|(r, &t)| {
            Arc::new(Regularized::new(
                Arc::new(LeastSquares::new(r.clone(), t)),
                lambda,
            )) as Arc<dyn ComponentOracle>
        })
        .collect();
    // normal equations: ((1/m)ΣaaT + λI) x = (1/m)Σ b a
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d];
    for (r, &t) in rows.iter().zip(&targets) {
        let rs = r.as_slice();
        for i in 0..d {
            for j in 0..d {
                gram[i * d + j] += rs[i] * rs[j] / m as f64;
            }
            rhs[i] += t * rs[i] / m as f64;
        }
    }
    for i in 0..d {
        gram[i * d + i] += lambda;
    }
    let xs = linalg::solve_spd(&gram, &rhs);
    let x_star = Vector::new(xs)?;
    let problem = Problem::new(comps, FunctionClass::smooth(1.0, None).with_lambda(lambda))?;
    let f_star = problem.evaluate_sum(&x_star)?;
    let f0 = problem.evaluate_sum(&Vector::zeros(d))?;
    problem
        .with_optimum(x_star, f_star)
        .map(|p| p.with_eps0(f0 - f_star))
}
